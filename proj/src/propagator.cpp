#include "kawalab/propagator.hpp"

#include <cmath>
#include <limits>

namespace kawalab {

namespace {

const cd I{0.0, 1.0};

// Undifferentiated nonlinearity of the profile equation: u^2/2 or u^3/3.
SpectralField nl_profile(const SpectralField& u, const EquationParams& params) {
  if (params.kind == EquationKind::Kawahara) {
    SpectralField w = dealiased_product(u, u);
    for (auto& cval : w.coeff) cval *= 0.5;
    return w;
  }
  SpectralField w = dealiased_product(u, u, &u);
  for (auto& cval : w.coeff) cval *= (1.0 / 3.0);
  return w;
}

}  // namespace

SpectralField linear_flow(const SpectralField& u, double t,
                          const EquationParams& params) {
  validate(params);
  SpectralField out = u;
  for (std::size_t i = 0; i < u.grid.n; ++i) {
    double xi = u.grid.frequency(i);
    out.coeff[i] *= std::exp(I * (t * symbol_p(xi, params)));
  }
  return out;
}

SpectralField nonlinear_term(const SpectralField& u,
                             const EquationParams& params) {
  validate(params);
  SpectralField w = nl_profile(u, params);
  for (std::size_t i = 0; i < u.grid.n; ++i) {
    double xi = u.grid.frequency(i);
    w.coeff[i] *= -I * xi;
  }
  return w;
}

SpectralField step_ifrk4(const SpectralField& u, double dt,
                         const EquationParams& params) {
  const Grid& g = u.grid;
  std::vector<cd> e_half(g.n), e_full(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    double ph = symbol_p(g.frequency(i), params);
    e_half[i] = std::exp(I * (0.5 * dt * ph));
    e_full[i] = e_half[i] * e_half[i];
  }
  const auto apply = [&](const std::vector<cd>& phase, const SpectralField& f) {
    SpectralField out = f;
    for (std::size_t i = 0; i < g.n; ++i) out.coeff[i] *= phase[i];
    return out;
  };
  const auto axpy = [&](const SpectralField& f, double s,
                        const SpectralField& d) {
    SpectralField out = f;
    for (std::size_t i = 0; i < g.n; ++i) out.coeff[i] += s * d.coeff[i];
    return out;
  };

  SpectralField k1 = nonlinear_term(u, params);
  SpectralField k2 = nonlinear_term(apply(e_half, axpy(u, 0.5 * dt, k1)), params);
  SpectralField k3 = nonlinear_term(axpy(apply(e_half, u), 0.5 * dt, k2), params);
  SpectralField k4 =
      nonlinear_term(axpy(apply(e_full, u), dt, apply(e_half, k3)), params);

  SpectralField out = apply(e_full, u);
  SpectralField t1 = apply(e_full, k1);
  SpectralField t23 = apply(e_half, axpy(k2, 1.0, k3));
  for (std::size_t i = 0; i < g.n; ++i)
    out.coeff[i] +=
        (dt / 6.0) * (t1.coeff[i] + 2.0 * t23.coeff[i] + k4.coeff[i]);
  return out;
}

Trajectory solve(const SpectralField& u0, double T, double dt,
                 const EquationParams& params, const SolveOptions& opt) {
  validate(params);
  if (!(T >= 0.0)) throw ConfigError("solve: T must be nonnegative");
  if (!(dt > 0.0)) throw ConfigError("solve: dt must be positive");
  if (opt.sample_every == 0) throw ConfigError("solve: sample_every must be > 0");

  Trajectory traj;
  traj.params = params;
  std::size_t n_steps =
      T == 0.0 ? 0
               : static_cast<std::size_t>(std::max(1.0, std::round(T / dt)));
  traj.dt = n_steps ? T / static_cast<double>(n_steps) : dt;
  traj.times.push_back(0.0);
  traj.states.push_back(u0);

  const double initial_l2 = hs_norm(u0, 0.0);
  SpectralField u = u0;
  for (std::size_t step = 1; step <= n_steps; ++step) {
    u = step_ifrk4(u, traj.dt, params);
    double l2 = hs_norm(u, 0.0);
    if (!std::isfinite(l2))
      throw NumericalError("solve: non-finite state at t=" +
                           std::to_string(step * traj.dt));
    if (initial_l2 > 0.0 && l2 > opt.blow_up_factor * initial_l2)
      throw NumericalError("solve: blow-up cap exceeded at t=" +
                           std::to_string(step * traj.dt));
    if (step % opt.sample_every == 0 || step == n_steps) {
      traj.times.push_back(static_cast<double>(step) * traj.dt);
      traj.states.push_back(u);
    }
  }
  return traj;
}

Invariants invariants(const SpectralField& u, const EquationParams& params) {
  validate(params);
  const Grid& g = u.grid;
  Invariants inv;
  inv.mass = g.box_length * u.coeff[0].real();
  double l2 = 0, grad = 0, curv = 0;
  for (std::size_t i = 0; i < g.n; ++i) {
    double xi = g.frequency(i);
    double a2 = std::norm(u.coeff[i]);
    l2 += a2;
    grad += xi * xi * a2;
    curv += xi * xi * xi * xi * a2;
  }
  inv.l2 = g.box_length * l2;

  // The power integral is evaluated on an oversampled physical grid so the
  // quadrature is exact for band-limited input.
  const std::size_t factor = params.kind == EquationKind::Kawahara ? 2 : 4;
  Grid big = make_grid(factor * g.n, g.box_length);
  SpectralField emb = zero_field(big);
  for (std::size_t i = 0; i < g.n; ++i) {
    int k = g.wavenumber(i);
    if (static_cast<std::size_t>(std::abs(k)) == g.n / 2) continue;
    emb.at_wavenumber(k) = u.coeff[i];
  }
  RealField phys = to_physical(emb);
  double power = 0;
  for (double v : phys.values) {
    double v3 = v * v * v;
    power += params.kind == EquationKind::Kawahara ? v3 : v3 * v;
  }
  power *= g.box_length / static_cast<double>(big.n);

  double pot = params.kind == EquationKind::Kawahara ? -power / 6.0
                                                     : -power / 12.0;
  inv.hamiltonian = pot + g.box_length * (0.5 * params.alpha * grad -
                                          0.5 * params.beta * curv);
  return inv;
}

SpectralField full_rhs(const SpectralField& u, const EquationParams& params) {
  SpectralField out = nonlinear_term(u, params);
  for (std::size_t i = 0; i < u.grid.n; ++i) {
    double xi = u.grid.frequency(i);
    out.coeff[i] += I * symbol_p(xi, params) * u.coeff[i];
  }
  return out;
}

double traveling_wave_residual(const SpectralField& phi, double speed,
                               const EquationParams& params) {
  SpectralField w = nl_profile(phi, params);
  SpectralField r = zero_field(phi.grid);
  for (std::size_t i = 0; i < phi.grid.n; ++i) {
    double xi = phi.grid.frequency(i);
    r.coeff[i] = I * xi * (w.coeff[i] - speed * phi.coeff[i]) -
                 I * symbol_p(xi, params) * phi.coeff[i];
  }
  return hs_norm(r, 0.0);
}

TravelingWave traveling_wave_petviashvili(const SpectralField& guess,
                                          double speed,
                                          const EquationParams& params,
                                          const PetviashviliOptions& opt) {
  validate(params);
  const Grid& g = guess.grid;
  if (hs_norm(guess, 0.0) == 0.0)
    throw ConfigError("traveling_wave_petviashvili: zero initial guess");

  std::vector<double> denom(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    double xi2 = g.frequency(i) * g.frequency(i);
    denom[i] = speed + params.alpha * xi2 - params.beta * xi2 * xi2;
    if (std::abs(denom[i]) < 1e-10 * (std::abs(speed) + xi2 * xi2 + 1.0))
      throw NumericalError(
          "traveling_wave_petviashvili: singular profile denominator at xi=" +
          std::to_string(g.frequency(i)));
  }
  const double gamma =
      params.kind == EquationKind::Kawahara ? 2.0 : 1.5;

  SpectralField phi = guess;
  TravelingWave tw;
  tw.speed = speed;
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    SpectralField w = nl_profile(phi, params);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < g.n; ++i) {
      num += denom[i] * std::norm(phi.coeff[i]);
      den += (w.coeff[i] * std::conj(phi.coeff[i])).real();
    }
    if (den == 0.0)
      throw NumericalError("traveling_wave_petviashvili: degenerate iterate");
    double s = std::pow(num / den, gamma);
    if (!std::isfinite(s))
      throw NumericalError("traveling_wave_petviashvili: diverged factor");

    SpectralField next = phi;
    double change = 0, scale = 0;
    for (std::size_t i = 0; i < g.n; ++i) {
      next.coeff[i] = s * w.coeff[i] / denom[i];
      change += std::norm(next.coeff[i] - phi.coeff[i]);
      scale += std::norm(next.coeff[i]);
    }
    phi = next;
    tw.iterations = it;
    if (scale > 0 && std::sqrt(change / scale) < opt.tolerance) break;
  }
  tw.profile = phi;
  tw.residual = traveling_wave_residual(phi, speed, params);
  if (tw.residual > opt.residual_goal)
    throw NumericalError(
        "traveling_wave_petviashvili: residual " + std::to_string(tw.residual) +
        " above goal after " + std::to_string(tw.iterations) + " iterations");
  return tw;
}

}  // namespace kawalab
