#include "kawalab/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kawalab {

namespace {

struct BlockTask {
  int max_dyad;   // the largest magnitude lies in [2^j, 2^(j+1))
  int min_dyad;   // smallest magnitude in [2^i, 2^(i+1)); i == j means the
                  // same-sign family where the sum escapes one dyad up
  int family;     // 0: opposite-sign large pair, 1: same-sign large pair
};

struct BlockResult {
  double min_ratio = 0;
  Triple argmin;
  std::uint64_t accepted = 0;
};

double ratio_of(double xi1, double xi2, double xi3, const EquationParams& p) {
  double m1 = std::abs(xi1), m2 = std::abs(xi2), m3 = std::abs(xi3);
  double nmax = std::max({m1, m2, m3});
  double nmin = std::min({m1, m2, m3});
  double h = resonance_h(xi1, xi2, p);
  return std::abs(h) / (nmax * nmax * nmax * nmax * nmin);
}

// Every zero-sum triple automatically has N_med >= N_max / 2, so the
// comparability constraint costs nothing; acceptance only checks the minimum
// magnitude's dyad and the global scale window [N0, n_cap].
BlockResult scan_block(const BlockTask& task, const EquationParams& params,
                       double n_cap, std::uint64_t samples,
                       std::uint64_t seed) {
  const double n0 = resonance_floor_scale(params);
  const double lo_max = std::ldexp(1.0, task.max_dyad);
  const double lo_min = std::ldexp(1.0, task.min_dyad);
  BlockResult res;
  res.min_ratio = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < samples; ++k) {
    Rng rng(seed, {0x5ca11edu, static_cast<std::uint64_t>(task.max_dyad + 64),
                   static_cast<std::uint64_t>(task.min_dyad + 64),
                   static_cast<std::uint64_t>(task.family), k});
    double a = rng.uniform(lo_max, 2.0 * lo_max);
    double sa = rng.sign();
    double xi1, xi2, xi3;
    if (task.family == 0) {
      double c = rng.uniform(lo_min, 2.0 * lo_min);
      double sc = rng.sign();
      xi1 = sa * a;
      xi3 = sc * c;
      xi2 = -xi1 - xi3;
      double m2 = std::abs(xi2);
      // The derived magnitude must stay in or just below the top dyad and
      // the small one must really be the minimum.
      if (m2 < lo_max / 2.0 || m2 >= 2.0 * lo_max) continue;
      if (c >= m2) continue;
    } else {
      double b = rng.uniform(lo_max, 2.0 * lo_max);
      xi1 = sa * a;
      xi2 = sa * b;
      xi3 = -xi1 - xi2;
    }
    double nmax = std::max({std::abs(xi1), std::abs(xi2), std::abs(xi3)});
    if (nmax < n0 || nmax > n_cap) continue;
    double r = ratio_of(xi1, xi2, xi3, params);
    ++res.accepted;
    if (r < res.min_ratio) {
      res.min_ratio = r;
      res.argmin = Triple{xi1, xi2, xi3};
    }
  }
  return res;
}

std::vector<BlockTask> block_tasks(const EquationParams& params, double n_cap) {
  const double n0 = resonance_floor_scale(params);
  const int j0 = static_cast<int>(std::floor(std::log2(n0)));
  const int jmax = static_cast<int>(std::ceil(std::log2(n_cap))) - 1;
  std::vector<BlockTask> tasks;
  for (int j = j0; j <= jmax; ++j) {
    int ilo = std::max(j - 12, -8);
    for (int i = ilo; i < j; ++i) tasks.push_back(BlockTask{j, i, 0});
    tasks.push_back(BlockTask{j, j, 1});
  }
  return tasks;
}

ResonanceReport run_scan(const EquationParams& params, double n_cap,
                         std::uint64_t samples_per_block, std::uint64_t seed,
                         bool parallel) {
  validate(params);
  if (n_cap < resonance_floor_scale(params))
    throw ConfigError("verify_resonance_bound: n_cap below the floor scale N0");
  if (samples_per_block == 0)
    throw ConfigError("verify_resonance_bound: samples_per_block must be > 0");

  auto tasks = block_tasks(params, n_cap);
  std::vector<BlockResult> results(tasks.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t t = 0; t < tasks.size(); ++t)
      results[t] = scan_block(tasks[t], params, n_cap, samples_per_block, seed);
  } else {
    for (std::size_t t = 0; t < tasks.size(); ++t)
      results[t] = scan_block(tasks[t], params, n_cap, samples_per_block, seed);
  }

  ResonanceReport rep;
  rep.params = params;
  rep.n_cap = n_cap;
  rep.samples_per_block = samples_per_block;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    rep.total_samples += r.accepted;
    if (r.accepted && r.min_ratio < rep.min_ratio) {
      rep.min_ratio = r.min_ratio;
      rep.argmin = r.argmin;
    }
  }
  if (rep.total_samples == 0)
    throw NumericalError("verify_resonance_bound: no admissible samples");
  return rep;
}

}  // namespace

ResonanceReport verify_resonance_bound(const EquationParams& params,
                                       double n_cap,
                                       std::uint64_t samples_per_block,
                                       std::uint64_t seed) {
  return run_scan(params, n_cap, samples_per_block, seed, true);
}

ResonanceReport verify_resonance_bound_serial(const EquationParams& params,
                                              double n_cap,
                                              std::uint64_t samples_per_block,
                                              std::uint64_t seed) {
  return run_scan(params, n_cap, samples_per_block, seed, false);
}

double resonance_min_lattice(const EquationParams& params, double n_cap,
                             std::size_t points_per_dyad) {
  validate(params);
  const double n0 = resonance_floor_scale(params);
  auto tasks = block_tasks(params, n_cap);
  double best = std::numeric_limits<double>::infinity();
  const auto P = points_per_dyad;
  for (const auto& task : tasks) {
    const double lo_max = std::ldexp(1.0, task.max_dyad);
    const double lo_min = std::ldexp(1.0, task.min_dyad);
    for (std::size_t ta = 0; ta < P; ++ta) {
      double a = lo_max * (1.0 + static_cast<double>(ta) / static_cast<double>(P));
      for (std::size_t tc = 0; tc < P; ++tc) {
        double c = lo_min * (1.0 + static_cast<double>(tc) / static_cast<double>(P));
        for (int sc = -1; sc <= 1; sc += 2) {
          double xi1, xi2, xi3;
          if (task.family == 0) {
            xi1 = a;
            xi3 = sc * c;
            xi2 = -xi1 - xi3;
            double m2 = std::abs(xi2);
            if (m2 < lo_max / 2.0 || m2 >= 2.0 * lo_max) continue;
            if (std::abs(xi3) >= m2) continue;
          } else {
            if (sc < 0) continue;  // same-sign family: one sign suffices
            xi1 = a;
            xi2 = c;  // here lo_min == lo_max
            xi3 = -xi1 - xi2;
          }
          double nmax = std::max({std::abs(xi1), std::abs(xi2), std::abs(xi3)});
          if (nmax < n0 || nmax > n_cap) continue;
          best = std::min(best, ratio_of(xi1, xi2, xi3, params));
        }
      }
    }
  }
  return best;
}

std::vector<std::array<double, 2>> resonance_zero_set(const EquationParams& p,
                                                      std::size_t resolution,
                                                      double tolerance) {
  validate(p);
  if (resolution == 0)
    throw ConfigError("resonance_zero_set: resolution must be > 0");
  double ratio = 3.0 * p.alpha / (5.0 * p.beta);
  std::vector<std::array<double, 2>> pts;
  if (ratio <= tolerance) return pts;
  // Bracket 3a - 5b(xi1^2 + xi1 xi2 + xi2^2) vanishes on an ellipse; in the
  // rotated frame u = (xi1+xi2)/sqrt2, v = (xi1-xi2)/sqrt2 the quadratic form
  // becomes (3u^2 + v^2)/2, so the level set R^2 = ratio is parameterized
  // exactly by u = R sqrt(2/3) cos, v = R sqrt(2) sin.
  double R = std::sqrt(ratio);
  pts.reserve(resolution);
  for (std::size_t t = 0; t < resolution; ++t) {
    double th = 2.0 * 3.141592653589793238462643 * static_cast<double>(t) /
                static_cast<double>(resolution);
    double u = R * std::sqrt(2.0 / 3.0) * std::cos(th);
    double v = R * std::sqrt(2.0) * std::sin(th);
    pts.push_back({(u + v) / std::sqrt(2.0), (u - v) / std::sqrt(2.0)});
  }
  return pts;
}

}  // namespace kawalab
