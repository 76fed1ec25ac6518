#pragma once

#include <string>
#include <utility>

#include "kawalab/cutoff.hpp"
#include "kawalab/propagator.hpp"
#include "kawalab/spacetime.hpp"

namespace kawalab {

struct FixedPointReport {
  // X_{s,b} distances between successive Picard iterates.
  std::vector<double> residuals;
  // Worst successive-residual ratio (conservative geometric decay estimate),
  // 0 when fewer than two residuals were recorded.
  double contraction_factor = 0.0;
  bool converged = false;
};

// Zero trajectory on the standard window lattice: n_points uniform samples
// spanning [-delta, delta]. The count must be odd so t = 0 is a sample.
Trajectory window_lattice_trajectory(const Grid& grid, const CutoffSpec& cutoff,
                                     const EquationParams& params,
                                     std::size_t n_points = 257);

// Windowed Duhamel map
//   T(u)(t) = psi(t/delta) [ W(t) u0 - int_0^t W(t-t') (u^p u_x)(t') dt' ]
// evaluated on the trajectory's own uniform lattice, which must cover
// [-delta, delta] and contain t = 0. The group W acts exactly per mode; the
// time integral uses fourth-order cumulative quadrature from t = 0.
Trajectory duhamel_map(const Trajectory& u, const SpectralField& u0,
                       const CutoffSpec& cutoff, const EquationParams& params);

// Picard iteration u(0) = 0, u(k+1) = T(u(k)). Stops when the successive
// X_{s,b} distance drops below tol or after k_max applications. Throws
// NumericalError when the residual grows three times in a row.
std::pair<Trajectory, FixedPointReport> picard_iterate(
    const SpectralField& u0, const CutoffSpec& cutoff,
    const EquationParams& params, const NormSpec& norm, std::size_t k_max,
    double tol, std::size_t n_points = 257);

// Worst ratio |T(u)-T(v)| / |u-v| in the discrete X_{s,b} norm over random
// probe pairs on the sphere of radius twice the measured windowed linear
// norm of u0 (the calibrated 2 c0 delta^{(1-2b)/2} |u0|_{H^s} ball). Returns
// 0 for u0 = 0, where the ball degenerates to a point.
double contraction_factor(const SpectralField& u0, const CutoffSpec& cutoff,
                          const EquationParams& params, const NormSpec& norm,
                          std::size_t probes, std::uint64_t seed);

// sup_{0 <= t <= delta/2} |u(t)-v(t)|_{H^s} / |u0-v0|_{H^s} for the two
// Picard limits. Returns 0 when the data coincide. Propagates the iteration's
// divergence error.
double lipschitz_data_dependence(const SpectralField& u0,
                                 const SpectralField& v0,
                                 const CutoffSpec& cutoff,
                                 const EquationParams& params,
                                 const NormSpec& norm);

std::string fixed_point_report_json(const FixedPointReport& rep);

}  // namespace kawalab
