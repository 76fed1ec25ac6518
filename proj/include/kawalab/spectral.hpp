#pragma once

#include <complex>
#include <vector>

#include "kawalab/common.hpp"

namespace kawalab {

using cd = std::complex<double>;

// Periodic grid on [0, box_length) with n equispaced points.
// Spectral coefficients are stored in FFT order: index i holds the mode with
// integer wavenumber k = i for i < n/2 and k = i - n for i >= n/2, i.e.
// frequency xi_k = 2*pi*k / box_length. Index n/2 is the unpaired Nyquist mode.
struct Grid {
  std::size_t n = 0;
  double box_length = 0.0;

  int wavenumber(std::size_t i) const {
    return i < n / 2 ? static_cast<int>(i)
                     : static_cast<int>(i) - static_cast<int>(n);
  }
  double frequency(std::size_t i) const {
    return 2.0 * 3.141592653589793238462643 * wavenumber(i) / box_length;
  }
  // Storage index of integer wavenumber k in [-n/2, n/2).
  std::size_t index_of(int k) const {
    return k >= 0 ? static_cast<std::size_t>(k)
                  : static_cast<std::size_t>(k + static_cast<int>(n));
  }
  double x(std::size_t j) const {
    return box_length * static_cast<double>(j) / static_cast<double>(n);
  }
  bool operator==(const Grid& o) const {
    return n == o.n && box_length == o.box_length;
  }
};

// n must be a power of two >= 8 so the dealiasing bands are nonempty.
Grid make_grid(std::size_t n, double box_length);

// Physical-space samples u(x_j).
struct RealField {
  Grid grid;
  std::vector<double> values;
};

// Spectral coefficients with the averaged-integral normalization
//   u_hat(xi_k) = (1/box_length) * integral of u(x) exp(-i xi_k x) dx,
// so a constant field has u_hat(0) equal to that constant.
struct SpectralField {
  Grid grid;
  std::vector<cd> coeff;

  cd at_wavenumber(int k) const { return coeff[grid.index_of(k)]; }
  cd& at_wavenumber(int k) { return coeff[grid.index_of(k)]; }
};

SpectralField zero_field(const Grid& g);

// In-place unnormalized FFT of arbitrary length (shared plan cache).
void fft_inplace(std::vector<cd>& data, bool forward);

SpectralField to_spectral(const RealField& u);
RealField to_physical(const SpectralField& u);

// Weighted norm (box_length * sum_k (1+|xi_k|)^(2s) |u_hat_k|^2)^(1/2).
// At s = 0 this is the L^2 norm of the physical field (Parseval).
double hs_norm(const SpectralField& u, double s);

// Retained-band cutoffs: products of fields band-limited to the retained band
// are exact there. Quadratic products keep |k| <= floor(n/3); triple products
// keep |k| <= n/4 - 1.
std::size_t quadratic_cutoff(std::size_t n);
std::size_t cubic_cutoff(std::size_t n);

// Pointwise product computed on a twice-oversampled grid, truncated to the
// retained band of the matching rule. Low modes carry no aliasing error and
// the Nyquist mode is always zero. With c == nullptr computes a*b under the
// quadratic rule, otherwise a*b*c under the cubic rule.
SpectralField dealiased_product(const SpectralField& a, const SpectralField& b,
                                const SpectralField* c = nullptr);

}  // namespace kawalab
