#include "kawalab/duhamel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "kawalab/quadrature.hpp"

namespace kawalab {

namespace {

const cd I{0.0, 1.0};

// Shared discretization for X_{s,b} distances between trajectories: resample
// through the window onto a tau lattice four windows wide. The spacing
// 4 delta / 512 matches the 257-point trajectory lattice step delta / 128,
// so interpolation lands on trajectory nodes.
constexpr std::size_t kNormTau = 512;

double traj_xsb_norm(const Trajectory& t, const CutoffSpec& cutoff,
                     const NormSpec& norm, const EquationParams& params) {
  SpaceTimeField f =
      spacetime_spectrum(t, cutoff, kNormTau, 4.0 * cutoff.delta);
  return xsb_norm(f, norm, params);
}

Trajectory traj_difference(const Trajectory& a, const Trajectory& b) {
  if (a.times.size() != b.times.size())
    throw ConfigError("trajectory difference: mismatched lattices");
  Trajectory d = a;
  for (std::size_t j = 0; j < d.states.size(); ++j) {
    if (!(d.states[j].grid == b.states[j].grid))
      throw ConfigError("trajectory difference: mismatched grids");
    for (std::size_t i = 0; i < d.states[j].coeff.size(); ++i)
      d.states[j].coeff[i] -= b.states[j].coeff[i];
  }
  return d;
}

double traj_distance(const Trajectory& a, const Trajectory& b,
                     const CutoffSpec& cutoff, const NormSpec& norm,
                     const EquationParams& params) {
  return traj_xsb_norm(traj_difference(a, b), cutoff, norm, params);
}

// Random real field with smooth spectral decay, unit L^2, for probe data.
SpectralField random_probe_data(const Grid& g, std::uint64_t seed,
                                std::uint64_t tag) {
  SpectralField w;
  w.grid = g;
  w.coeff.assign(g.n, cd{0.0, 0.0});
  Rng rng(seed, {0xd4a3eull, tag});
  for (std::size_t k = 1; k <= g.n / 4; ++k) {
    double decay = std::exp(-0.15 * static_cast<double>(k * k) /
                            static_cast<double>(g.n / 8 * (g.n / 8)));
    cd a{rng.gauss() * decay, rng.gauss() * decay};
    w.coeff[k] = a;
    w.coeff[g.n - k] = std::conj(a);
  }
  double h0 = hs_norm(w, 0.0);
  if (h0 > 0)
    for (auto& c : w.coeff) c /= h0;
  return w;
}

}  // namespace

Trajectory window_lattice_trajectory(const Grid& grid, const CutoffSpec& cutoff,
                                     const EquationParams& params,
                                     std::size_t n_points) {
  validate(cutoff);
  validate(params);
  if (n_points < 33 || n_points % 2 == 0)
    throw ConfigError(
        "window lattice: need an odd point count >= 33 so t = 0 is a sample");
  Trajectory t;
  t.params = params;
  t.dt = 2.0 * cutoff.delta / static_cast<double>(n_points - 1);
  t.times.resize(n_points);
  SpectralField zero;
  zero.grid = grid;
  zero.coeff.assign(grid.n, cd{0.0, 0.0});
  t.states.assign(n_points, zero);
  for (std::size_t j = 0; j < n_points; ++j)
    t.times[j] = -cutoff.delta + static_cast<double>(j) * t.dt;
  t.times[(n_points - 1) / 2] = 0.0;
  return t;
}

Trajectory duhamel_map(const Trajectory& u, const SpectralField& u0,
                       const CutoffSpec& cutoff, const EquationParams& params) {
  validate(cutoff);
  validate(params);
  const std::size_t n_t = u.times.size();
  if (n_t < 2 || u.states.size() != n_t)
    throw ConfigError("duhamel_map: malformed trajectory");
  const Grid& g = u0.grid;
  if (u0.coeff.size() != g.n)
    throw ConfigError("duhamel_map: malformed datum");
  for (const auto& st : u.states)
    if (!(st.grid == g))
      throw ConfigError("duhamel_map: trajectory grid differs from datum");

  const double h = (u.times.back() - u.times.front()) /
                   static_cast<double>(n_t - 1);
  if (!(h > 0.0)) throw ConfigError("duhamel_map: degenerate time lattice");
  const double slack = 1e-9 * h;
  for (std::size_t j = 0; j < n_t; ++j)
    if (std::abs(u.times[j] - (u.times.front() + static_cast<double>(j) * h)) >
        slack)
      throw ConfigError("duhamel_map: time lattice is not uniform");
  if (u.times.front() > -cutoff.delta + slack ||
      u.times.back() < cutoff.delta - slack)
    throw ConfigError("duhamel_map: lattice does not cover [-delta, delta]");

  std::size_t in_support = 0;
  for (double t : u.times)
    if (std::abs(t) < cutoff.delta) ++in_support;
  if (in_support < 32)
    throw ConfigError(
        "duhamel_map: lattice too coarse (fewer than 32 points in the cutoff "
        "support)");

  std::size_t j0 = 0;
  for (std::size_t j = 1; j < n_t; ++j)
    if (std::abs(u.times[j]) < std::abs(u.times[j0])) j0 = j;
  if (std::abs(u.times[j0]) > slack)
    throw ConfigError("duhamel_map: lattice must contain t = 0");

  // nonlinear_term returns -d/dx(u^(p+1)/(p+1)), the full right-hand side of
  // the evolution, so Duhamel reads u0 + int_0^t W(-t') N(u(t')) dt'.
  std::vector<SpectralField> nl(n_t);
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < n_t; ++j)
    nl[j] = nonlinear_term(u.states[j], params);

  Trajectory out;
  out.params = params;
  out.dt = h;
  out.times = u.times;
  SpectralField zero;
  zero.grid = g;
  zero.coeff.assign(g.n, cd{0.0, 0.0});
  out.states.assign(n_t, zero);

  std::vector<double> window(n_t);
  for (std::size_t j = 0; j < n_t; ++j)
    window[j] = window_value(cutoff, u.times[j]);

#pragma omp parallel
  {
    std::vector<cd> integrand(n_t);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < g.n; ++i) {
      const double p = symbol_p(g.frequency(i), params);
      for (std::size_t j = 0; j < n_t; ++j)
        integrand[j] = std::exp(-I * (u.times[j] * p)) * nl[j].coeff[i];
      std::vector<cd> integral = cumulative_integral(integrand, h, j0);
      for (std::size_t j = 0; j < n_t; ++j) {
        if (window[j] == 0.0) continue;
        out.states[j].coeff[i] = window[j] *
                                 std::exp(I * (u.times[j] * p)) *
                                 (u0.coeff[i] + integral[j]);
      }
    }
  }
  return out;
}

std::pair<Trajectory, FixedPointReport> picard_iterate(
    const SpectralField& u0, const CutoffSpec& cutoff,
    const EquationParams& params, const NormSpec& norm, std::size_t k_max,
    double tol, std::size_t n_points) {
  if (k_max < 2) throw ConfigError("picard_iterate: k_max must be >= 2");
  if (!(tol > 0.0)) throw ConfigError("picard_iterate: tol must be positive");

  Trajectory cur = window_lattice_trajectory(u0.grid, cutoff, params, n_points);
  FixedPointReport rep;
  double prev = std::numeric_limits<double>::infinity();
  int growing = 0;
  for (std::size_t k = 0; k < k_max; ++k) {
    Trajectory nxt = duhamel_map(cur, u0, cutoff, params);
    double r = traj_distance(nxt, cur, cutoff, norm, params);
    rep.residuals.push_back(r);
    cur = std::move(nxt);
    if (!std::isfinite(r))
      throw NumericalError("picard_iterate: non-finite residual");
    if (std::isfinite(prev) && r > prev) {
      if (++growing >= 3)
        throw NumericalError(
            "picard_iterate: residual grew for 3 consecutive iterations");
    } else {
      growing = 0;
    }
    prev = r;
    if (r < tol) {
      rep.converged = true;
      break;
    }
  }
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < rep.residuals.size(); ++k)
    if (rep.residuals[k] > 0.0)
      worst = std::max(worst, rep.residuals[k + 1] / rep.residuals[k]);
  rep.contraction_factor = worst;
  return {std::move(cur), rep};
}

double contraction_factor(const SpectralField& u0, const CutoffSpec& cutoff,
                          const EquationParams& params, const NormSpec& norm,
                          std::size_t probes, std::uint64_t seed) {
  if (probes < 2) throw ConfigError("contraction_factor: probes must be >= 2");
  const Grid& g = u0.grid;
  Trajectory zero = window_lattice_trajectory(g, cutoff, params, 257);
  Trajectory lin = duhamel_map(zero, u0, cutoff, params);
  double radius = traj_xsb_norm(lin, cutoff, norm, params);
  if (!(radius > 0.0)) return 0.0;
  radius *= 2.0;

  auto probe = [&](std::uint64_t tag) {
    SpectralField w0 = random_probe_data(g, seed, tag);
    Trajectory t = duhamel_map(zero, w0, cutoff, params);
    double x = traj_xsb_norm(t, cutoff, norm, params);
    double scale = radius / x;
    for (auto& st : t.states)
      for (auto& c : st.coeff) c *= scale;
    return t;
  };

  double worst = 0.0;
  for (std::size_t q = 0; q < probes; ++q) {
    Trajectory pu = probe(2 * q);
    Trajectory pv = probe(2 * q + 1);
    Trajectory tu = duhamel_map(pu, u0, cutoff, params);
    Trajectory tv = duhamel_map(pv, u0, cutoff, params);
    double den = traj_distance(pu, pv, cutoff, norm, params);
    if (!(den > 0.0)) continue;
    worst = std::max(worst, traj_distance(tu, tv, cutoff, norm, params) / den);
  }
  return worst;
}

double lipschitz_data_dependence(const SpectralField& u0,
                                 const SpectralField& v0,
                                 const CutoffSpec& cutoff,
                                 const EquationParams& params,
                                 const NormSpec& norm) {
  if (!(u0.grid == v0.grid))
    throw ConfigError("lipschitz_data_dependence: mismatched grids");
  SpectralField d0;
  d0.grid = u0.grid;
  d0.coeff.resize(u0.coeff.size());
  for (std::size_t i = 0; i < d0.coeff.size(); ++i)
    d0.coeff[i] = u0.coeff[i] - v0.coeff[i];
  double den = hs_norm(d0, norm.s);
  if (den == 0.0) return 0.0;

  double scale = std::max(hs_norm(u0, norm.s), hs_norm(v0, norm.s));
  double tol = 1e-10 * std::max(scale, 1e-6);
  auto u = picard_iterate(u0, cutoff, params, norm, 32, tol);
  auto v = picard_iterate(v0, cutoff, params, norm, 32, tol);

  double sup = 0.0;
  const Trajectory& tu = u.first;
  const Trajectory& tv = v.first;
  for (std::size_t j = 0; j < tu.times.size(); ++j) {
    double t = tu.times[j];
    if (t < -1e-12 || t > 0.5 * cutoff.delta + 1e-12) continue;
    SpectralField d;
    d.grid = tu.states[j].grid;
    d.coeff.resize(tu.states[j].coeff.size());
    for (std::size_t i = 0; i < d.coeff.size(); ++i)
      d.coeff[i] = tu.states[j].coeff[i] - tv.states[j].coeff[i];
    sup = std::max(sup, hs_norm(d, norm.s));
  }
  return sup / den;
}

std::string fixed_point_report_json(const FixedPointReport& rep) {
  nlohmann::json j;
  j["residuals"] = rep.residuals;
  j["contraction_factor"] = rep.contraction_factor;
  j["converged"] = rep.converged;
  return j.dump(2);
}

}  // namespace kawalab
