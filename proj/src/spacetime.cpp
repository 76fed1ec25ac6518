#include "kawalab/spacetime.hpp"

#include <algorithm>
#include <cmath>

#include "kawalab/quadrature.hpp"

namespace kawalab {

namespace {

const cd I{0.0, 1.0};

SpaceTimeField empty_field(const Grid& g, std::size_t n_tau,
                           double time_window) {
  if (n_tau < 8 || (n_tau & (n_tau - 1)) != 0)
    throw ConfigError("space-time lattice: n_tau must be a power of two >= 8");
  if (!(time_window > 0.0))
    throw ConfigError("space-time lattice: time_window must be positive");
  SpaceTimeField f;
  f.grid = g;
  f.n_tau = n_tau;
  f.time_window = time_window;
  f.amp.assign(g.n * n_tau, cd{0.0, 0.0});
  return f;
}

// Transform time samples v(t_j) on the centered lattice
// t_j = -T/2 + j T/n into averaged tau coefficients. The centering shows up
// as the alternating phase (-1)^k on the FFT output.
void time_rows_to_tau(SpaceTimeField& f, std::vector<cd>& row,
                      std::size_t row_index) {
  fft_inplace(row, true);
  const double inv = 1.0 / static_cast<double>(f.n_tau);
  for (std::size_t m = 0; m < f.n_tau; ++m) {
    double sgn = (f.tau_wavenumber(m) % 2 == 0) ? 1.0 : -1.0;
    f.at(row_index, m) = sgn * inv * row[m];
  }
}

}  // namespace

SpaceTimeField spacetime_spectrum(const Trajectory& traj,
                                  const CutoffSpec& cutoff, std::size_t n_tau,
                                  double time_window) {
  validate(cutoff);
  if (traj.states.empty())
    throw ConfigError("spacetime_spectrum: empty trajectory");
  if (cutoff.delta > 0.5 * time_window)
    throw ConfigError("spacetime_spectrum: window support exceeds the lattice");
  const Grid& g = traj.states.front().grid;
  for (const auto& st : traj.states)
    if (!(st.grid == g))
      throw ConfigError("spacetime_spectrum: mixed grids in trajectory");

  SpaceTimeField f = empty_field(g, n_tau, time_window);
  const double dt = time_window / static_cast<double>(n_tau);

  // Per-mode linear interpolation of the trajectory at the lattice times
  // where the window is active.
  std::vector<std::vector<cd>> slices(n_tau);
  for (std::size_t j = 0; j < n_tau; ++j) {
    double t = -0.5 * time_window + static_cast<double>(j) * dt;
    double w = window_value(cutoff, t);
    if (w == 0.0) continue;
    auto hi = std::lower_bound(traj.times.begin(), traj.times.end(), t);
    if (hi == traj.times.end() || (hi == traj.times.begin() && *hi > t + 1e-12))
      throw ConfigError(
          "spacetime_spectrum: trajectory does not cover the window");
    std::size_t i1 = static_cast<std::size_t>(hi - traj.times.begin());
    std::size_t i0 = i1 > 0 ? i1 - 1 : 0;
    double t0 = traj.times[i0], t1 = traj.times[i1];
    double lam = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
    std::vector<cd> v(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
      v[i] = w * ((1.0 - lam) * traj.states[i0].coeff[i] +
                  lam * traj.states[i1].coeff[i]);
    slices[j] = std::move(v);
  }

  std::vector<cd> row(n_tau);
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = 0; j < n_tau; ++j)
      row[j] = slices[j].empty() ? cd{0.0, 0.0} : slices[j][i];
    time_rows_to_tau(f, row, i);
  }
  return f;
}

double xsb_norm(const SpaceTimeField& f, const NormSpec& norm,
                const EquationParams& params) {
  validate(params);
  double acc = 0.0;
  for (std::size_t i = 0; i < f.grid.n; ++i) {
    double xi = f.grid.frequency(i);
    double wx = std::pow(1.0 + std::abs(xi), 2.0 * norm.s);
    double p = symbol_p(xi, params);
    for (std::size_t m = 0; m < f.n_tau; ++m) {
      double lam = f.tau(m) - p;
      acc += wx * std::pow(1.0 + std::abs(lam), 2.0 * norm.b) *
             std::norm(f.at(i, m));
    }
  }
  return std::sqrt(f.grid.box_length * f.time_window * acc);
}

double off_surface_fraction(const SpaceTimeField& f, double lambda_cut,
                            const EquationParams& params) {
  double total = 0, off = 0;
  for (std::size_t i = 0; i < f.grid.n; ++i) {
    double p = symbol_p(f.grid.frequency(i), params);
    for (std::size_t m = 0; m < f.n_tau; ++m) {
      double a2 = std::norm(f.at(i, m));
      total += a2;
      if (std::abs(f.tau(m) - p) > lambda_cut) off += a2;
    }
  }
  if (total == 0.0)
    throw NumericalError("off_surface_fraction: zero field");
  return off / total;
}

LinearEstimateReport verify_linear_estimates(
    const Grid& grid, const EquationParams& params, double s,
    const std::vector<double>& b_list, const std::vector<double>& delta_list,
    std::size_t ensemble, std::uint64_t seed, std::size_t n_tau,
    double time_window) {
  validate(params);
  if (b_list.empty() || delta_list.empty() || ensemble == 0)
    throw ConfigError("verify_linear_estimates: empty sweep");

  const double dt = time_window / static_cast<double>(n_tau);
  const std::size_t center = n_tau / 2;  // lattice time zero

  // Deterministic ensemble: a couple of single modes, then random smooth
  // data. Returned fields have unit H^s norm.
  const auto datum_field = [&](std::uint64_t d) {
    SpectralField u0 = zero_field(grid);
    if (d == 0) {
      u0.at_wavenumber(1) = cd{0.5, 0.0};
      u0.at_wavenumber(-1) = cd{0.5, 0.0};
    } else if (d == 1) {
      u0.at_wavenumber(2) = cd{0.0, -0.5};
      u0.at_wavenumber(-2) = cd{0.0, 0.5};
    } else {
      Rng rng(seed, {0x11fea5u, d});
      for (int k = 1; k <= static_cast<int>(grid.n) / 4; ++k) {
        double decay = std::exp(-0.08 * k * k);
        cd a{rng.gauss() * decay, rng.gauss() * decay};
        u0.at_wavenumber(k) = a;
        u0.at_wavenumber(-k) = std::conj(a);
      }
    }
    double nrm = hs_norm(u0, s);
    if (nrm == 0.0) throw NumericalError("verify_linear_estimates: zero datum");
    for (auto& c : u0.coeff) c /= nrm;
    return u0;
  };

  LinearEstimateReport rep;
  for (double b : b_list) {
    std::vector<double> worst_per_delta;
    for (double delta : delta_list) {
      CutoffSpec cut{delta};
      validate(cut);
      if (delta > 0.5 * time_window)
        throw ConfigError("verify_linear_estimates: delta exceeds the window");
      double worst = 0.0;

      // Weighted norm of a field whose rows were demodulated per mode by
      // the linear carrier exp(i t p(xi)). Modulation invariance moves the
      // X^{s,b} weight to (1 + |tau|)^b; measuring the slow envelope keeps
      // every frequency representable on the tau lattice, while the raw
      // carrier of high modes (|p| ~ xi^5) would alias across it.
      const auto envelope_norm = [&](const SpaceTimeField& f, double ss,
                                     double bb) {
        double acc = 0.0;
        for (std::size_t i = 0; i < grid.n; ++i) {
          double wx = std::pow(1.0 + std::abs(grid.frequency(i)), 2.0 * ss);
          for (std::size_t m = 0; m < f.n_tau; ++m)
            acc += wx * std::pow(1.0 + std::abs(f.tau(m)), 2.0 * bb) *
                   std::norm(f.at(i, m));
        }
        return std::sqrt(grid.box_length * f.time_window * acc);
      };

      for (std::uint64_t d = 0; d < ensemble; ++d) {
        SpectralField u0 = datum_field(d);

        // Homogeneous form: the demodulated windowed group orbit is just
        // psi(t/delta) g per mode.
        SpaceTimeField hom = [&] {
          SpaceTimeField f = empty_field(grid, n_tau, time_window);
          std::vector<cd> row(n_tau);
          for (std::size_t i = 0; i < grid.n; ++i) {
            for (std::size_t j = 0; j < n_tau; ++j) {
              double t = -0.5 * time_window + static_cast<double>(j) * dt;
              row[j] = window_value(cut, t) * u0.coeff[i];
            }
            time_rows_to_tau(f, row, i);
          }
          return f;
        }();
        double r_hom = envelope_norm(hom, s, b) / hs_norm(u0, s);

        // Retarded form: f(t) = psi(t/delta) e^{i omega t} W(t) g with a
        // modulation so the source is not purely on the surface. After the
        // same demodulation the source envelope is psi e^{i omega t} g and
        // the output envelope is its running integral from t = 0.
        const double omega = 2.0 + static_cast<double>(d % 3);
        SpaceTimeField src = empty_field(grid, n_tau, time_window);
        SpaceTimeField out = empty_field(grid, n_tau, time_window);
        std::vector<cd> row(n_tau), integrand(n_tau);
        for (std::size_t i = 0; i < grid.n; ++i) {
          for (std::size_t j = 0; j < n_tau; ++j) {
            double t = -0.5 * time_window + static_cast<double>(j) * dt;
            double w = window_value(cut, t);
            cd fval = w == 0.0 ? cd{0.0, 0.0}
                               : w * std::exp(I * (omega * t)) * u0.coeff[i];
            row[j] = fval;
            integrand[j] = fval;
          }
          time_rows_to_tau(src, row, i);
          auto integral = cumulative_integral(integrand, dt, center);
          for (std::size_t j = 0; j < n_tau; ++j) {
            double t = -0.5 * time_window + static_cast<double>(j) * dt;
            double w = window_value(cut, t);
            row[j] = w == 0.0 ? cd{0.0, 0.0} : w * integral[j];
          }
          time_rows_to_tau(out, row, i);
        }
        double denom = envelope_norm(src, s, b - 1.0);
        double r_duh = denom > 0 ? envelope_norm(out, s, b) / denom : 0.0;

        rep.rows.push_back(LinearEstimateRow{delta, b, s, d, r_hom, r_duh});
        worst = std::max(worst, r_hom);
      }
      worst_per_delta.push_back(worst);
    }
    rep.homogeneous_slopes.push_back(
        loglog_slope(delta_list, worst_per_delta));
  }
  return rep;
}

namespace {

// Spectral coefficients -> physical samples u(x_l, t_j), laid out l-major in
// xi storage order (the spatial FFT index doubles as the lattice index).
std::vector<cd> to_physical(const SpaceTimeField& f) {
  const std::size_t n = f.grid.n, nt = f.n_tau;
  std::vector<cd> buf(n * nt);
  std::vector<cd> row(nt);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < nt; ++m) {
      double sgn = (f.tau_wavenumber(m) % 2 == 0) ? 1.0 : -1.0;
      row[m] = sgn * f.at(i, m);
    }
    fft_inplace(row, false);
    for (std::size_t j = 0; j < nt; ++j) buf[i * nt + j] = row[j];
  }
  std::vector<cd> col(n);
  for (std::size_t j = 0; j < nt; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = buf[i * nt + j];
    fft_inplace(col, false);
    for (std::size_t i = 0; i < n; ++i) buf[i * nt + j] = col[i];
  }
  return buf;
}

double weighted_norm(const SpaceTimeField& f, double s, double bexp,
                     bool derivative, const EquationParams& params) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.grid.n; ++i) {
    double xi = f.grid.frequency(i);
    double wx = std::pow(1.0 + std::abs(xi), 2.0 * s);
    if (derivative) wx *= xi * xi;
    double p = symbol_p(xi, params);
    for (std::size_t m = 0; m < f.n_tau; ++m) {
      double lam = f.tau(m) - p;
      acc += wx * std::pow(1.0 + std::abs(lam), 2.0 * bexp) *
             std::norm(f.at(i, m));
    }
  }
  return std::sqrt(f.grid.box_length * f.time_window * acc);
}

}  // namespace

SpaceTimeField spacetime_product(const SpaceTimeField& u,
                                 const SpaceTimeField& v) {
  if (!(u.grid == v.grid) || u.n_tau != v.n_tau ||
      u.time_window != v.time_window)
    throw ConfigError("spacetime_product: mismatched lattices");
  const std::size_t n = u.grid.n, nt = u.n_tau;
  std::vector<cd> pu = to_physical(u);
  {
    std::vector<cd> pv = to_physical(v);
    for (std::size_t k = 0; k < pu.size(); ++k) pu[k] *= pv[k];
  }
  SpaceTimeField g = empty_field(u.grid, nt, u.time_window);
  std::vector<cd> col(n);
  const double invn = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < nt; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = pu[i * nt + j];
    fft_inplace(col, true);
    for (std::size_t i = 0; i < n; ++i) pu[i * nt + j] = invn * col[i];
  }
  std::vector<cd> row(nt);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < nt; ++j) row[j] = pu[i * nt + j];
    time_rows_to_tau(g, row, i);
  }
  return g;
}

double l2_norm(const SpaceTimeField& f) {
  double acc = 0.0;
  for (const cd& a : f.amp) acc += std::norm(a);
  return std::sqrt(f.grid.box_length * f.time_window * acc);
}

double bilinear_ratio(const SpaceTimeField& u, const SpaceTimeField& v,
                      const NormSpec& norm, const EquationParams& params) {
  validate(params);
  double den = xsb_norm(u, norm, params) * xsb_norm(v, norm, params);
  if (!(den > 0.0))
    throw ConfigError("bilinear_ratio: zero-norm input");
  SpaceTimeField uv = spacetime_product(u, v);
  return weighted_norm(uv, norm.s, norm.b - 1.0, true, params) / den;
}

double trilinear_ratio(const SpaceTimeField& u, const SpaceTimeField& v,
                       const SpaceTimeField& w, const NormSpec& norm,
                       const EquationParams& params) {
  validate(params);
  double den = xsb_norm(u, norm, params) * xsb_norm(v, norm, params) *
               xsb_norm(w, norm, params);
  if (!(den > 0.0))
    throw ConfigError("trilinear_ratio: zero-norm input");
  SpaceTimeField uvw = spacetime_product(spacetime_product(u, v), w);
  return weighted_norm(uvw, norm.s, norm.b - 1.0, true, params) / den;
}

double asym_bilinear_ratio(const SpaceTimeField& u, const SpaceTimeField& v,
                           double s, double eps, const EquationParams& params) {
  validate(params);
  double den = xsb_norm(u, NormSpec{-0.5, 0.5 - eps}, params) *
               xsb_norm(v, NormSpec{s, 0.5 + eps}, params);
  if (!(den > 0.0))
    throw ConfigError("asym_bilinear_ratio: zero-norm input");
  return l2_norm(spacetime_product(u, v)) / den;
}

}  // namespace kawalab
