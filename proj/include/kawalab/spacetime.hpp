#pragma once

#include "kawalab/cutoff.hpp"
#include "kawalab/dispersion.hpp"
#include "kawalab/propagator.hpp"
#include "kawalab/spectral.hpp"

namespace kawalab {

// Dense space-time spectrum on the product lattice. Spatial modes follow the
// Grid convention; temporal modes use the same FFT ordering with spacing
// 2*pi / time_window, so index m holds tau_m = 2*pi*wavenumber(m)/time_window.
// Amplitudes are stored row-major as amp[i * n_tau + m] and carry the doubly
// averaged normalization (1/(box_length*time_window)) * integral of
// u exp(-i(xi x + tau t)).
struct SpaceTimeField {
  Grid grid;
  std::size_t n_tau = 0;
  double time_window = 0.0;
  std::vector<cd> amp;

  int tau_wavenumber(std::size_t m) const {
    return m < n_tau / 2 ? static_cast<int>(m)
                         : static_cast<int>(m) - static_cast<int>(n_tau);
  }
  double tau(std::size_t m) const {
    return 2.0 * 3.141592653589793238462643 * tau_wavenumber(m) / time_window;
  }
  cd& at(std::size_t i, std::size_t m) { return amp[i * n_tau + m]; }
  cd at(std::size_t i, std::size_t m) const { return amp[i * n_tau + m]; }
};

struct NormSpec {
  double s = 0.0;
  double b = 0.0;
};

// Windows the trajectory by bump_psi(t/delta), resamples it on a uniform
// n_tau-point lattice spanning [-time_window/2, time_window/2) and transforms
// in time. The trajectory must cover the support of the window. Trajectory
// states are evaluated by exact per-mode linear interpolation in t.
SpaceTimeField spacetime_spectrum(const Trajectory& traj,
                                  const CutoffSpec& cutoff,
                                  std::size_t n_tau, double time_window);

// Discrete weighted norm
//   sqrt(box_length * time_window *
//        sum (1+|xi|)^(2s) (1+|tau - p(xi)|)^(2b) |amp|^2).
// At s = b = 0 this is the space-time L^2 norm.
double xsb_norm(const SpaceTimeField& f, const NormSpec& norm,
                const EquationParams& params);

// Mass fraction at modulation distance greater than lambda_cut from the
// characteristic surface tau = p(xi).
double off_surface_fraction(const SpaceTimeField& f, double lambda_cut,
                            const EquationParams& params);

struct LinearEstimateRow {
  double delta = 0;
  double b = 0;
  double s = 0;
  std::uint64_t datum = 0;
  double ratio_homogeneous = 0;   // |psi W u0|_{s,b} / |u0|_{H^s}
  double ratio_duhamel = 0;       // |psi int W(t-t') f|_{s,b} / |f|_{s,b-1}
};

struct LinearEstimateReport {
  std::vector<LinearEstimateRow> rows;
  // log-log slope of the worst (max over data) homogeneous ratio vs delta,
  // one entry per b in the order requested.
  std::vector<double> homogeneous_slopes;
};

// Sweeps delta over powers of two and measures both window estimates on a
// small deterministic ensemble (single modes and random smooth data).
LinearEstimateReport verify_linear_estimates(
    const Grid& grid, const EquationParams& params, double s,
    const std::vector<double>& b_list, const std::vector<double>& delta_list,
    std::size_t ensemble, std::uint64_t seed, std::size_t n_tau = 2048,
    double time_window = 2.0);

// Pointwise space-time product computed through physical samples. Both inputs
// must share the lattice. Frequencies add under multiplication, so the caller
// is responsible for spectral headroom: if the supports reach past half the
// lattice in xi or tau the product wraps around.
SpaceTimeField spacetime_product(const SpaceTimeField& u,
                                 const SpaceTimeField& v);

// Space-time L^2 norm, sqrt(box_length * time_window * sum |amp|^2).
double l2_norm(const SpaceTimeField& f);

// |d_x(uv)|_{s,b-1} / (|u|_{s,b} |v|_{s,b}) on the dense lattice.
double bilinear_ratio(const SpaceTimeField& u, const SpaceTimeField& v,
                      const NormSpec& norm, const EquationParams& params);

// |d_x(uvw)|_{s,b-1} / (|u|_{s,b} |v|_{s,b} |w|_{s,b}).
double trilinear_ratio(const SpaceTimeField& u, const SpaceTimeField& v,
                       const SpaceTimeField& w, const NormSpec& norm,
                       const EquationParams& params);

// |uv|_{L^2} / (|u|_{-1/2, 1/2 - eps} |v|_{s, 1/2 + eps}).
double asym_bilinear_ratio(const SpaceTimeField& u, const SpaceTimeField& v,
                           double s, double eps, const EquationParams& params);

}  // namespace kawalab
