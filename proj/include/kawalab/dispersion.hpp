#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "kawalab/common.hpp"

namespace kawalab {

enum class EquationKind { Kawahara, ModifiedKawahara };

struct EquationParams {
  double alpha = 1.0;
  double beta = 1.0;
  EquationKind kind = EquationKind::Kawahara;
};

inline void validate(const EquationParams& p) {
  if (p.beta == 0.0) throw ConfigError("EquationParams: beta must be nonzero");
}

// Dispersion symbol of the linear flow: p(xi) = -beta xi^5 + alpha xi^3.
inline double symbol_p(double xi, const EquationParams& p) {
  double xi2 = xi * xi;
  return xi2 * xi * (p.alpha - p.beta * xi2);
}

// Three-wave resonance function p(xi1)+p(xi2)+p(xi3) on the zero-sum plane
// xi3 = -(xi1+xi2), in factored form
//   xi1 xi2 xi3 (3 alpha - 5 beta (xi1^2 + xi1 xi2 + xi2^2)).
inline double resonance_h(double xi1, double xi2, const EquationParams& p) {
  double xi3 = -(xi1 + xi2);
  double sigma = xi1 * xi1 + xi1 * xi2 + xi2 * xi2;
  return xi1 * xi2 * xi3 * (3.0 * p.alpha - 5.0 * p.beta * sigma);
}

// Shift polynomial q with p(eta) + p(xi - eta) = p(xi) + q(xi, eta):
//   q(xi, eta) = 5 beta xi eta (xi-eta)(xi^2 - xi eta + eta^2)
//                - 3 alpha xi eta (xi-eta).
inline double q_shift(double xi, double eta, const EquationParams& p) {
  double prod = xi * eta * (xi - eta);
  return prod * (5.0 * p.beta * (xi * xi - xi * eta + eta * eta) - 3.0 * p.alpha);
}

// Frequency scale below which the cubic term can cancel the quintic one:
// N0 = max(1, 2 sqrt(|3 alpha / (5 beta)|)). Above N0 the factored bracket
// in resonance_h is bounded below by a multiple of N_max^2.
inline double resonance_floor_scale(const EquationParams& p) {
  validate(p);
  double r = std::sqrt(std::abs(3.0 * p.alpha / (5.0 * p.beta)));
  return std::max(1.0, 2.0 * r);
}

struct Triple {
  double xi1 = 0, xi2 = 0, xi3 = 0;
};

struct ResonanceReport {
  EquationParams params;
  double n_cap = 0;
  std::uint64_t samples_per_block = 0;
  double min_ratio = 0;          // min over samples of |h| / (N_max^4 N_min)
  Triple argmin;
  std::uint64_t total_samples = 0;
};

// Samples zero-sum triples in every dyadic pattern whose two largest entries
// are comparable, with N0 <= N_max <= n_cap, and reports the minimum of
// |h| / (N_max^4 N_min) over the sample. Sampling is keyed per (block, index)
// so enlarging samples_per_block extends the sample set monotonically.
ResonanceReport verify_resonance_bound(const EquationParams& params,
                                       double n_cap,
                                       std::uint64_t samples_per_block,
                                       std::uint64_t seed);

// Serial reference for the scan kernel; results are identical.
ResonanceReport verify_resonance_bound_serial(const EquationParams& params,
                                              double n_cap,
                                              std::uint64_t samples_per_block,
                                              std::uint64_t seed);

// Deterministic coarse lattice scan over the same admissible set, used as an
// independent cross-check of the sampled minimum.
double resonance_min_lattice(const EquationParams& params, double n_cap,
                             std::size_t points_per_dyad);

// Points (xi1, xi2) where the factored bracket vanishes within tolerance:
// the ellipse xi1^2 + xi1 xi2 + xi2^2 = 3 alpha / (5 beta) when that ratio is
// positive, empty otherwise. Emits `resolution` points of the exact
// parameterization.
std::vector<std::array<double, 2>> resonance_zero_set(const EquationParams& p,
                                                      std::size_t resolution,
                                                      double tolerance = 1e-9);

}  // namespace kawalab
