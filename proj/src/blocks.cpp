#include "kawalab/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "json.hpp"
#include "kawalab/common.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kawalab {

namespace {

bool is_dyadic(double x) {
  return x > 0.0 && std::exp2(std::round(std::log2(x))) == x;
}

bool within(double a, double b, double factor) {
  return a <= factor * b && b <= factor * a;
}

std::array<double, 3> sorted3(double a, double b, double c) {
  std::array<double, 3> v{a, b, c};
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

std::array<double, 3> DyadicBlockSpec::n_sorted() const {
  return sorted3(n1, n2, n3);
}

std::array<double, 3> DyadicBlockSpec::l_sorted() const {
  return sorted3(l1, l2, l3);
}

void validate(const DyadicBlockSpec& spec) {
  for (double n : {spec.n1, spec.n2, spec.n3})
    if (!is_dyadic(n))
      throw ConfigError("block spec: frequency labels must be positive dyadic");
  if (!is_dyadic(spec.h))
    throw ConfigError("block spec: resonance label must be positive dyadic");
  for (double l : {spec.l1, spec.l2, spec.l3})
    if (!is_dyadic(l) || l < 1.0)
      throw ConfigError("block spec: modulation labels must be dyadic >= 1");
}

std::string regime_name(BlockRegime r) {
  switch (r) {
    case BlockRegime::PlusPlusCoherence: return "PlusPlusCoherence";
    case BlockRegime::PlusMinusCoherence: return "PlusMinusCoherence";
    case BlockRegime::Other: return "Other";
    case BlockRegime::Vanishing: return "Vanishing";
  }
  return "Unknown";
}

BlockRegime classify_regime(const DyadicBlockSpec& spec) {
  validate(spec);
  const auto ns = spec.n_sorted();
  const auto ls = spec.l_sorted();
  // Zero-sum in frequency forces the two largest labels together; the
  // modulation identity forces the largest modulation to the level of the
  // resonance or of the second modulation.
  if (ns[2] > 2.0 * ns[1]) return BlockRegime::Vanishing;
  if (!within(ls[2], std::max(spec.h, ls[1]), 4.0))
    return BlockRegime::Vanishing;

  if (ns[2] <= 2.0 * ns[0] && within(ls[2], spec.h, 4.0))
    return BlockRegime::PlusPlusCoherence;

  if (ns[1] >= 4.0 * ns[0]) {
    const double n[3] = {spec.n1, spec.n2, spec.n3};
    const double l[3] = {spec.l1, spec.l2, spec.l3};
    int small = 0;
    for (int j = 1; j < 3; ++j)
      if (n[j] < n[small]) small = j;
    double lsmall = l[small];
    bool dominant = true;
    for (int j = 0; j < 3; ++j)
      if (j != small && l[j] > lsmall) dominant = false;
    if (dominant && within(lsmall, spec.h, 4.0))
      return BlockRegime::PlusMinusCoherence;
  }
  return BlockRegime::Other;
}

double regime_bound(const DyadicBlockSpec& spec) {
  BlockRegime r = classify_regime(spec);
  if (r == BlockRegime::Vanishing)
    throw ConfigError("regime_bound: spec labels an empty block");
  const auto ns = spec.n_sorted();
  const auto ls = spec.l_sorted();
  const double pre = std::sqrt(ls[0]) / (ns[2] * ns[2]);
  switch (r) {
    case BlockRegime::PlusPlusCoherence:
      return pre * std::sqrt(ls[1]);
    case BlockRegime::PlusMinusCoherence:
      return pre * std::sqrt(std::min(spec.h, ns[2] / ns[0] * ls[1]));
    default:
      return pre * std::sqrt(std::min(spec.h, ls[1]));
  }
}

double elementary_upper_bound(const DyadicBlockSpec& spec) {
  return std::sqrt(spec.l_sorted()[0] * spec.n_sorted()[0]);
}

DiscreteMultiplier discretize_block(const DyadicBlockSpec& spec,
                                    const EquationParams& params,
                                    std::size_t cells_per_dyad) {
  validate(spec);
  validate(params);
  if (cells_per_dyad < 4)
    throw ConfigError("discretize_block: cells_per_dyad must be >= 4");
  const double c = static_cast<double>(cells_per_dyad);
  const double N[3] = {spec.n1, spec.n2, spec.n3};
  const double L[3] = {spec.l1, spec.l2, spec.l3};

  DiscreteMultiplier m;
  for (int j = 0; j < 3; ++j) {
    m.dxi[j] = N[j] / c;
    m.dlambda[j] = std::max(1.0, L[j] / c);
    m.measure[j] = m.dxi[j] * m.dlambda[j];
  }

  // The slot with the coarsest modulation lattice absorbs the identities;
  // the choice is a label function so permuted specs stay equivalent.
  auto prefer = [&](int a, int b) {
    if (L[a] != L[b]) return L[a] > L[b];
    if (N[a] != N[b]) return N[a] > N[b];
    return a > b;
  };
  int det = 0;
  for (int j = 1; j < 3; ++j)
    if (prefer(j, det)) det = j;
  const int fa = (det + 1) % 3, fb = (det + 2) % 3;

  // Entries enumerate the lattices of the two free slots, so each entry
  // stands for a cell of that parametrization of the zero-sum plane; its
  // Riemann weight is the product of those two cell measures.  The
  // determined slot contributes membership constraints, not measure.
  m.entry_weight = m.measure[fa] * m.measure[fb];

  const double g = std::min({m.dxi[0], m.dxi[1], m.dxi[2]});

  auto xi_values = [&](int j) {
    std::vector<double> v;
    for (std::size_t k = cells_per_dyad; k < 2 * cells_per_dyad; ++k) {
      double x = static_cast<double>(k) * m.dxi[j];
      v.push_back(x);
      v.push_back(-x);
    }
    return v;
  };
  auto lam_values = [&](int j) {
    std::vector<double> v;
    long lo = std::lround(std::ceil(L[j] / m.dlambda[j]));
    long hi = std::lround(std::ceil(2.0 * L[j] / m.dlambda[j]));
    for (long k = lo; k < hi; ++k) {
      double x = static_cast<double>(k) * m.dlambda[j];
      v.push_back(x);
      v.push_back(-x);
    }
    return v;
  };

  std::array<std::unordered_map<std::int64_t, std::uint32_t>, 3> index;
  auto site_id = [&](int j, double xi, double lam) {
    long kxi = std::lround(xi / g);
    long klam = std::lround(lam / m.dlambda[j]);
    std::int64_t key = (static_cast<std::int64_t>(kxi) + (1ll << 30)) *
                           (1ll << 20) +
                       (klam + (1ll << 19));
    auto ins = index[j].try_emplace(
        key, static_cast<std::uint32_t>(m.sites[j].size()));
    if (ins.second) m.sites[j].push_back({xi, lam});
    return ins.first->second;
  };

  const std::vector<double> xa = xi_values(fa), xb = xi_values(fb);
  const std::vector<double> la = lam_values(fa), lb = lam_values(fb);

  for (double xia : xa) {
    for (double xib : xb) {
      double xid = -(xia + xib);
      double axi = std::abs(xid);
      if (axi < N[det] || axi >= 2.0 * N[det]) continue;
      double hv = resonance_h(xia, xib, params);
      double ah = std::abs(hv);
      if (ah < spec.h || ah >= 4.0 * spec.h) continue;
      for (double lama : la) {
        for (double lamb : lb) {
          double lamd = -(lama + lamb + hv);
          double al = std::abs(lamd);
          if (al < L[det] || al >= 2.0 * L[det]) continue;
          double snapped =
              std::round(lamd / m.dlambda[det]) * m.dlambda[det];
          DiscreteMultiplier::Entry e;
          e.slot[fa] = site_id(fa, xia, lama);
          e.slot[fb] = site_id(fb, xib, lamb);
          e.slot[det] = site_id(det, xid, snapped);
          e.value = 1.0;
          m.entries.push_back(e);
        }
      }
    }
  }
  return m;
}

DiscreteMultiplier cyclic_constant_multiplier(std::size_t n, double value) {
  if (n == 0) throw ConfigError("cyclic_constant_multiplier: n must be >= 1");
  DiscreteMultiplier m;
  for (int j = 0; j < 3; ++j) {
    m.measure[j] = 1.0;
    m.dxi[j] = 1.0;
    m.dlambda[j] = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      m.sites[j].push_back({static_cast<double>(i), 0.0});
  }
  m.entry_weight = 1.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      DiscreteMultiplier::Entry e;
      e.slot[0] = static_cast<std::uint32_t>(a);
      e.slot[1] = static_cast<std::uint32_t>(b);
      e.slot[2] = static_cast<std::uint32_t>((2 * n - a - b) % n);
      e.value = value;
      m.entries.push_back(e);
    }
  return m;
}

std::vector<double> contract_slot(const DiscreteMultiplier& m, int target,
                                  const std::array<std::vector<double>, 3>& f,
                                  bool parallel) {
  if (target < 0 || target > 2)
    throw ConfigError("contract_slot: target slot out of range");
  const int o1 = (target + 1) % 3, o2 = (target + 2) % 3;
  std::vector<double> G(m.sites[target].size(), 0.0);
  const double w = m.entry_weight;

#ifdef _OPENMP
  if (parallel) {
    const int nt = omp_get_max_threads();
    std::vector<std::vector<double>> bufs(nt);
#pragma omp parallel num_threads(nt)
    {
      auto& B = bufs[omp_get_thread_num()];
      B.assign(G.size(), 0.0);
#pragma omp for schedule(static)
      for (std::size_t k = 0; k < m.entries.size(); ++k) {
        const auto& e = m.entries[k];
        B[e.slot[target]] +=
            e.value * w * f[o1][e.slot[o1]] * f[o2][e.slot[o2]];
      }
    }
    for (const auto& B : bufs)
      for (std::size_t i = 0; i < G.size(); ++i) G[i] += B[i];
    return G;
  }
#else
  (void)parallel;
#endif
  for (const auto& e : m.entries)
    G[e.slot[target]] += e.value * w * f[o1][e.slot[o1]] * f[o2][e.slot[o2]];
  return G;
}

NormEstimate estimate_multiplier_norm(const DiscreteMultiplier& m,
                                      std::size_t restarts,
                                      std::size_t max_iters, double tol,
                                      std::uint64_t seed) {
  if (m.entries.empty())
    throw ConfigError("estimate_multiplier_norm: empty support");
  if (restarts < 1 || max_iters < 1)
    throw ConfigError("estimate_multiplier_norm: need restarts, iters >= 1");

  struct RestartResult {
    double best = 0.0;
    std::vector<double> trace;
  };
  std::vector<RestartResult> results(restarts);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t r = 0; r < restarts; ++r) {
    std::array<std::vector<double>, 3> f;
    Rng rng(seed, {0xb10c5ull, r});
    bool degenerate = false;
    for (int j = 0; j < 3; ++j) {
      f[j].resize(m.sites[j].size());
      double nrm2 = 0.0;
      for (auto& x : f[j]) {
        x = rng.gauss();
        nrm2 += x * x * m.measure[j];
      }
      if (nrm2 <= 0.0) { degenerate = true; break; }
      double inv = 1.0 / std::sqrt(nrm2);
      for (auto& x : f[j]) x *= inv;
    }
    if (degenerate) continue;

    RestartResult out;
    double prev = 0.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
      double obj = 0.0;
      for (int j = 0; j < 3; ++j) {
        std::vector<double> G = contract_slot(m, j, f, false);
        double nrm2 = 0.0;
        for (std::size_t i = 0; i < G.size(); ++i) {
          double v = G[i] / m.measure[j];
          nrm2 += v * v * m.measure[j];
        }
        if (nrm2 <= 0.0) { degenerate = true; break; }
        double inv = 1.0 / std::sqrt(nrm2);
        for (std::size_t i = 0; i < G.size(); ++i)
          f[j][i] = G[i] / m.measure[j] * inv;
        obj = std::sqrt(nrm2);
      }
      if (degenerate) break;
      out.trace.push_back(obj);
      out.best = obj;
      if (it > 0 && obj - prev <= tol * std::max(1.0, obj)) break;
      prev = obj;
    }
    results[r] = std::move(out);
  }

  NormEstimate est;
  est.restarts = restarts;
  for (const auto& r : results)
    if (r.best > est.lower_bound) {
      est.lower_bound = r.best;
      est.trace = r.trace;
    }
  return est;
}

namespace {

// Least squares of y against the active columns of {1, cols...}, dropping
// columns the scan held (numerically) constant.
std::map<std::string, double> multifit(
    const std::vector<std::string>& names,
    const std::vector<std::vector<double>>& cols,
    const std::vector<double>& y) {
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    double lo = cols[j][0], hi = cols[j][0];
    for (double v : cols[j]) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > 1e-9) active.push_back(j);
  }
  std::map<std::string, double> out;
  const std::size_t k = active.size() + 1;
  if (y.size() < k) return out;

  auto col = [&](std::size_t j, std::size_t row) {
    return j == 0 ? 1.0 : cols[active[j - 1]][row];
  };
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t r = 0; r < y.size(); ++r)
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) a[i][j] += col(i, r) * col(j, r);
      a[i][k] += col(i, r) * y[r];
    }
  for (std::size_t p = 0; p < k; ++p) {
    std::size_t piv = p;
    for (std::size_t i = p + 1; i < k; ++i)
      if (std::abs(a[i][p]) > std::abs(a[piv][p])) piv = i;
    std::swap(a[p], a[piv]);
    if (std::abs(a[p][p]) < 1e-12) return {};
    for (std::size_t i = 0; i < k; ++i) {
      if (i == p) continue;
      double fac = a[i][p] / a[p][p];
      for (std::size_t j = p; j <= k; ++j) a[i][j] -= fac * a[p][j];
    }
  }
  for (std::size_t j = 1; j < k; ++j)
    out[names[active[j - 1]]] = a[j][k] / a[j][j];
  return out;
}

}  // namespace

BlockScanReport verify_block_estimates(const std::vector<DyadicBlockSpec>& scan,
                                       const EquationParams& params,
                                       std::size_t cells_per_dyad,
                                       std::size_t restarts,
                                       std::uint64_t seed) {
  BlockScanReport report;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const DyadicBlockSpec& spec = scan[i];
    BlockScanRow row;
    row.spec = spec;
    row.regime = classify_regime(spec);
    DiscreteMultiplier dm = discretize_block(spec, params, cells_per_dyad);
    row.support = dm.support_cardinality();
    if (row.regime != BlockRegime::Vanishing) row.bound = regime_bound(spec);
    if (row.support > 0) {
      std::uint64_t row_seed = fnv1a64(&i, sizeof i, seed);
      row.estimate =
          estimate_multiplier_norm(dm, restarts, 48, 1e-7, row_seed)
              .lower_bound;
    }
    if (row.bound > 0) row.ratio = row.estimate / row.bound;
    report.c_scan = std::max(report.c_scan, row.ratio);
    double elem = elementary_upper_bound(spec);
    if (elem > 0)
      report.c_disc = std::max(report.c_disc, row.estimate / elem);
    report.rows.push_back(row);
  }

  std::map<std::string, std::vector<const BlockScanRow*>> groups;
  for (const auto& row : report.rows)
    if (row.estimate > 0 && row.regime != BlockRegime::Vanishing)
      groups[regime_name(row.regime)].push_back(&row);
  for (const auto& kv : groups) {
    std::vector<std::vector<double>> cols(3);
    std::vector<double> y;
    for (const BlockScanRow* row : kv.second) {
      auto ns = row->spec.n_sorted();
      auto ls = row->spec.l_sorted();
      cols[0].push_back(std::log(ls[0]));
      cols[1].push_back(std::log(ls[1]));
      cols[2].push_back(std::log(ns[2]));
      y.push_back(std::log(row->estimate));
    }
    auto fit = multifit({"l_min", "l_med", "n_max"}, cols, y);
    if (!fit.empty()) report.slopes[kv.first] = fit;
  }
  return report;
}

std::vector<DyadicBlockSpec> plusplus_scan_family(
    const std::vector<double>& n_list, const std::vector<double>& lmin_list,
    const std::vector<double>& lmed_list) {
  if (n_list.empty()) throw ConfigError("scan family: empty n_list");
  std::vector<DyadicBlockSpec> scan;
  auto push = [&](double n, double l1, double l2) {
    DyadicBlockSpec s;
    s.n1 = n;
    s.n2 = n;
    s.n3 = 2.0 * n;
    s.h = 64.0 * n * n * n * n * n;
    s.l1 = l1;
    s.l2 = l2;
    s.l3 = s.h;
    scan.push_back(s);
  };
  const double n0 = n_list.front();
  for (double l1 : lmin_list) push(n0, l1, 256.0);
  for (double l2 : lmed_list) push(n0, 1.0, l2);
  for (double n : n_list) push(n, 1.0, 4.0);
  return scan;
}

std::vector<DyadicBlockSpec> plusminus_scan_family(
    double n, const std::vector<double>& lmed_list) {
  std::vector<DyadicBlockSpec> scan;
  for (double l2 : lmed_list) {
    DyadicBlockSpec s;
    s.n1 = 1.0;
    s.n2 = n;
    s.n3 = n;
    s.h = 16.0 * n * n * n * n;
    // L1 = 2H keeps slot 0 the dominant-modulation slot even when L2 reaches
    // H, so the whole sweep is discretized in one parametrization. L1 = H
    // would tie with L2 = H and silently switch the determined slot there.
    s.l1 = 2.0 * s.h;
    s.l2 = l2;
    s.l3 = 1.0;
    scan.push_back(s);
  }
  return scan;
}

std::string block_report_csv(const BlockScanReport& report) {
  std::string out = "n1,n2,n3,h,l1,l2,l3,regime,estimate,bound,ratio\n";
  char buf[512];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%.17g,%.17g,"
                  "%.17g\n",
                  r.spec.n1, r.spec.n2, r.spec.n3, r.spec.h, r.spec.l1,
                  r.spec.l2, r.spec.l3, regime_name(r.regime).c_str(),
                  r.estimate, r.bound, r.ratio);
    out += buf;
  }
  return out;
}

std::string block_report_json(const BlockScanReport& report) {
  nlohmann::json j;
  j["c_scan"] = report.c_scan;
  j["c_disc"] = report.c_disc;
  j["rows"] = report.rows.size();
  nlohmann::json slopes = nlohmann::json::object();
  for (const auto& kv : report.slopes) {
    nlohmann::json one = nlohmann::json::object();
    for (const auto& s : kv.second) one[s.first] = s.second;
    slopes[kv.first] = one;
  }
  j["slopes"] = slopes;
  return j.dump(2);
}

}  // namespace kawalab
