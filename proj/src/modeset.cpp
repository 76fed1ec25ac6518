#include "kawalab/modeset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "json.hpp"

namespace kawalab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

bool site_less(const SparseMode& a, const SparseMode& b) {
  if (a.xi != b.xi) return a.xi < b.xi;
  return a.lambda < b.lambda;
}

// contiguous ranges of equal xi in a canonical mode list
struct XiGroup {
  std::int64_t xi;
  std::size_t begin, end;
};

std::vector<XiGroup> xi_groups(const ModeSet& f) {
  std::vector<XiGroup> g;
  std::size_t i = 0;
  while (i < f.modes.size()) {
    std::size_t j = i;
    while (j < f.modes.size() && f.modes[j].xi == f.modes[i].xi) ++j;
    g.push_back({f.modes[i].xi, i, j});
    i = j;
  }
  return g;
}

const XiGroup* find_group(const std::vector<XiGroup>& g, std::int64_t xi) {
  auto it = std::lower_bound(
      g.begin(), g.end(), xi,
      [](const XiGroup& a, std::int64_t x) { return a.xi < x; });
  return (it != g.end() && it->xi == xi) ? &*it : nullptr;
}

// stable-sort scratch by lambda, merge equal offsets, append to out
void merge_cells(std::vector<SparseMode>& scratch, std::vector<SparseMode>& out) {
  std::stable_sort(scratch.begin(), scratch.end(),
                   [](const SparseMode& a, const SparseMode& b) {
                     return a.lambda < b.lambda;
                   });
  for (std::size_t i = 0; i < scratch.size();) {
    SparseMode cell = scratch[i];
    std::size_t j = i + 1;
    while (j < scratch.size() && scratch[j].lambda == cell.lambda) {
      cell.amp += scratch[j].amp;
      ++j;
    }
    if (cell.amp != cd{0.0, 0.0}) out.push_back(cell);
    i = j;
  }
  scratch.clear();
}

double cell_weight(std::int64_t xi, double lambda, double s, double bexp,
                   bool derivative) {
  double x = static_cast<double>(xi);
  double w = std::pow(1.0 + std::abs(x), 2.0 * s) *
             std::pow(1.0 + std::abs(lambda), 2.0 * bexp);
  return derivative ? x * x * w : w;
}

double raw_weighted_sq(const ModeSet& f, double s, double bexp,
                       bool derivative) {
  double acc = 0.0;
  for (const auto& m : f.modes)
    acc += cell_weight(m.xi, m.lambda, s, bexp, derivative) * std::norm(m.amp);
  return acc;
}

ModeSet convolve_impl(const ModeSet& u, const ModeSet& v, bool parallel) {
  if (!(u.params.alpha == v.params.alpha && u.params.beta == v.params.beta))
    throw ConfigError("convolve: mismatched dispersion parameters");
  const auto gu = xi_groups(u);
  const auto gv = xi_groups(v);
  std::vector<std::int64_t> out_xi;
  out_xi.reserve(gu.size() * gv.size());
  for (const auto& a : gu)
    for (const auto& b : gv) out_xi.push_back(a.xi + b.xi);
  std::sort(out_xi.begin(), out_xi.end());
  out_xi.erase(std::unique(out_xi.begin(), out_xi.end()), out_xi.end());

  std::vector<std::vector<SparseMode>> slots(out_xi.size());
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (std::size_t oi = 0; oi < out_xi.size(); ++oi) {
    const std::int64_t xo = out_xi[oi];
    std::vector<SparseMode> scratch;
    for (const auto& a : gu) {
      const XiGroup* b = find_group(gv, xo - a.xi);
      if (!b) continue;
      double h = resonance_h(static_cast<double>(a.xi),
                             static_cast<double>(b->xi), u.params);
      for (std::size_t i = a.begin; i < a.end; ++i)
        for (std::size_t j = b->begin; j < b->end; ++j)
          scratch.push_back({xo,
                             u.modes[i].lambda + v.modes[j].lambda + h,
                             u.modes[i].amp * v.modes[j].amp});
    }
    merge_cells(scratch, slots[oi]);
  }

  ModeSet out;
  out.params = u.params;
  std::size_t total = 0;
  for (const auto& s : slots) total += s.size();
  out.modes.reserve(total);
  for (const auto& s : slots)
    out.modes.insert(out.modes.end(), s.begin(), s.end());
  return out;
}

// Weighted squared norms of convolve(uv, w) for several (s, bexp) weights at
// once, one output frequency at a time so the triple product is never held
// in memory. uv and w must be canonical.
std::vector<double> conv_weighted_sq(const ModeSet& uv, const ModeSet& w,
                                     const std::vector<double>& s_list,
                                     double bexp, bool derivative) {
  const auto ga = xi_groups(uv);
  const auto gb = xi_groups(w);
  std::vector<std::int64_t> out_xi;
  for (const auto& a : ga)
    for (const auto& b : gb) out_xi.push_back(a.xi + b.xi);
  std::sort(out_xi.begin(), out_xi.end());
  out_xi.erase(std::unique(out_xi.begin(), out_xi.end()), out_xi.end());

  std::vector<double> acc(s_list.size(), 0.0);
#pragma omp parallel
  {
    std::vector<double> local(s_list.size(), 0.0);
    std::vector<SparseMode> scratch, cells;
#pragma omp for schedule(dynamic, 4)
    for (std::size_t oi = 0; oi < out_xi.size(); ++oi) {
      const std::int64_t xo = out_xi[oi];
      scratch.clear();
      cells.clear();
      for (const auto& a : ga) {
        const XiGroup* b = find_group(gb, xo - a.xi);
        if (!b) continue;
        double h = resonance_h(static_cast<double>(a.xi),
                               static_cast<double>(b->xi), uv.params);
        for (std::size_t i = a.begin; i < a.end; ++i)
          for (std::size_t j = b->begin; j < b->end; ++j)
            scratch.push_back({xo,
                               uv.modes[i].lambda + w.modes[j].lambda + h,
                               uv.modes[i].amp * w.modes[j].amp});
      }
      merge_cells(scratch, cells);
      for (const auto& c : cells) {
        double a2 = std::norm(c.amp);
        for (std::size_t k = 0; k < s_list.size(); ++k)
          local[k] +=
              cell_weight(c.xi, c.lambda, s_list[k], bexp, derivative) * a2;
      }
    }
#pragma omp critical
    for (std::size_t k = 0; k < s_list.size(); ++k) acc[k] += local[k];
  }
  return acc;
}

}  // namespace

void canonicalize(ModeSet& f) {
  std::stable_sort(f.modes.begin(), f.modes.end(), site_less);
  std::vector<SparseMode> merged;
  merged.reserve(f.modes.size());
  for (std::size_t i = 0; i < f.modes.size();) {
    SparseMode cell = f.modes[i];
    std::size_t j = i + 1;
    while (j < f.modes.size() && f.modes[j].xi == cell.xi &&
           f.modes[j].lambda == cell.lambda) {
      cell.amp += f.modes[j].amp;
      ++j;
    }
    if (cell.amp != cd{0.0, 0.0}) merged.push_back(cell);
    i = j;
  }
  f.modes = std::move(merged);
}

double xsb_norm(const ModeSet& f, const NormSpec& norm) {
  return kTwoPi * std::sqrt(raw_weighted_sq(f, norm.s, norm.b, false));
}

void normalize_mass(ModeSet& f) {
  double n = xsb_norm(f, NormSpec{0.0, 0.0});
  if (n == 0.0) throw ConfigError("normalize_mass: zero field");
  for (auto& m : f.modes) m.amp /= n;
}

ModeSet convolve(const ModeSet& u, const ModeSet& v) {
  return convolve_impl(u, v, true);
}

ModeSet convolve_serial(const ModeSet& u, const ModeSet& v) {
  return convolve_impl(u, v, false);
}

double bilinear_ratio(const ModeSet& u, const ModeSet& v,
                      const NormSpec& norm) {
  double du = xsb_norm(u, norm), dv = xsb_norm(v, norm);
  if (du == 0.0 || dv == 0.0)
    throw ConfigError("bilinear_ratio: zero denominator");
  ModeSet uv = convolve(u, v);
  double num =
      kTwoPi * std::sqrt(raw_weighted_sq(uv, norm.s, norm.b - 1.0, true));
  return num / (du * dv);
}

double trilinear_ratio(const ModeSet& u, const ModeSet& v, const ModeSet& w,
                       const NormSpec& norm) {
  double du = xsb_norm(u, norm), dv = xsb_norm(v, norm),
         dw = xsb_norm(w, norm);
  if (du == 0.0 || dv == 0.0 || dw == 0.0)
    throw ConfigError("trilinear_ratio: zero denominator");
  ModeSet uv = convolve(u, v);
  auto sq = conv_weighted_sq(uv, w, {norm.s}, norm.b - 1.0, true);
  return kTwoPi * std::sqrt(sq[0]) / (du * dv * dw);
}

double asym_bilinear_ratio(const ModeSet& u, const ModeSet& v, double s,
                           double eps) {
  if (!(eps > 0.0 && eps < 0.5))
    throw ConfigError("asym_bilinear_ratio: eps must lie in (0, 1/2)");
  double du = xsb_norm(u, NormSpec{-0.5, 0.5 - eps});
  double dv = xsb_norm(v, NormSpec{s, 0.5 + eps});
  if (du == 0.0 || dv == 0.0)
    throw ConfigError("asym_bilinear_ratio: zero denominator");
  ModeSet uv = convolve(u, v);
  double num = kTwoPi * std::sqrt(raw_weighted_sq(uv, 0.0, 0.0, false));
  return num / (du * dv);
}

namespace {

bool dyadic(std::int64_t n) { return n >= 1 && (n & (n - 1)) == 0; }

}  // namespace

ModeSet block_concentrated_field(std::int64_t n_dyad, std::int64_t l_dyad,
                                 int sign, const EquationParams& params,
                                 std::uint64_t seed) {
  validate(params);
  if (!dyadic(n_dyad) || !dyadic(l_dyad))
    throw ConfigError("block_concentrated_field: N and L must be dyadic >= 1");
  if (sign != 1 && sign != -1)
    throw ConfigError("block_concentrated_field: sign must be +-1");
  ModeSet f;
  f.params = params;
  Rng rng(seed, {0xb10cull, static_cast<std::uint64_t>(n_dyad),
                 static_cast<std::uint64_t>(l_dyad),
                 static_cast<std::uint64_t>(sign + 2)});
  for (std::int64_t a = n_dyad; a < 2 * n_dyad; ++a) {
    for (std::int64_t l = l_dyad; l < 2 * l_dyad; ++l) {
      for (int ls : {1, -1}) {
        cd amp{rng.gauss(), rng.gauss()};
        f.modes.push_back(
            {sign * a, static_cast<double>(ls * l), amp});
      }
    }
  }
  canonicalize(f);
  normalize_mass(f);
  return f;
}

ModeSet smooth_profile_field(std::int64_t bandwidth, double xi_decay,
                             std::int64_t lambda_cap, double keep_fraction,
                             bool deterministic, const EquationParams& params,
                             std::uint64_t seed) {
  validate(params);
  if (bandwidth < 1 || lambda_cap < 0)
    throw ConfigError("smooth_profile_field: bad support parameters");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw ConfigError("smooth_profile_field: keep_fraction in (0,1]");
  ModeSet f;
  f.params = params;
  // deterministic members use a fixed thinning stream so they are identical
  // across seeds; amplitudes are the bare profile
  Rng thin(deterministic ? 0x7717ull : seed,
           {0x7717ull, static_cast<std::uint64_t>(bandwidth)});
  Rng rng(seed, {0x53300ull, static_cast<std::uint64_t>(bandwidth),
                 static_cast<std::uint64_t>(lambda_cap)});
  for (std::int64_t xi = -bandwidth; xi <= bandwidth; ++xi) {
    for (std::int64_t l = -lambda_cap; l <= lambda_cap; ++l) {
      bool keep = std::llabs(xi) <= 8 || keep_fraction >= 1.0 ||
                  thin.uniform() < keep_fraction;
      if (!keep) continue;
      double prof =
          std::pow(1.0 + std::abs(static_cast<double>(xi)), -xi_decay) *
          std::pow(1.0 + std::abs(static_cast<double>(l)), -2.0);
      cd amp = deterministic ? cd{prof, 0.0}
                             : cd{rng.gauss() * prof, rng.gauss() * prof};
      f.modes.push_back({xi, static_cast<double>(l), amp});
    }
  }
  canonicalize(f);
  normalize_mass(f);
  return f;
}

SpaceTimeField densify(const ModeSet& f, const Grid& grid,
                       std::size_t n_tau) {
  if (n_tau < 8 || (n_tau & (n_tau - 1)) != 0)
    throw ConfigError("densify: n_tau must be a power of two >= 8");
  SpaceTimeField out;
  out.grid = grid;
  out.n_tau = n_tau;
  out.time_window = kTwoPi;
  out.amp.assign(grid.n * n_tau, cd{0.0, 0.0});
  const std::int64_t half = static_cast<std::int64_t>(n_tau) / 2;
  for (const auto& m : f.modes) {
    std::int64_t kmin = -static_cast<std::int64_t>(grid.n) / 2;
    std::int64_t kmax = static_cast<std::int64_t>(grid.n) / 2 - 1;
    if (m.xi < kmin || m.xi > kmax)
      throw ConfigError("densify: mode frequency exceeds the grid");
    double tau = m.lambda + symbol_p(static_cast<double>(m.xi), f.params);
    double rounded = std::nearbyint(tau);
    if (std::abs(tau - rounded) > 1e-6)
      throw ConfigError("densify: mode sits off the integer tau lattice");
    std::int64_t kt = static_cast<std::int64_t>(rounded);
    if (kt < -half || kt >= half)
      throw ConfigError("densify: mode modulation exceeds the tau lattice");
    std::size_t i = grid.index_of(static_cast<int>(m.xi));
    std::size_t row = static_cast<std::size_t>(kt >= 0 ? kt : kt + 2 * half);
    out.at(i, row) += m.amp;
  }
  return out;
}

const char* estimate_name(EstimateKind kind) {
  switch (kind) {
    case EstimateKind::Bilinear: return "bilinear";
    case EstimateKind::Trilinear: return "trilinear";
    case EstimateKind::AsymBilinear: return "asym";
  }
  return "unknown";
}

double RatioScanReport::max_ratio(double s, std::int64_t n,
                                  const std::string& regime) const {
  double best = 0.0;
  for (const auto& r : rows) {
    if (r.s != s || r.n_scale != n) continue;
    if (regime != "all" && r.regime != regime) continue;
    best = std::max(best, r.ratio);
  }
  return best;
}

namespace {

std::int64_t random_dyad(Rng& rng, std::int64_t cap) {
  int levels = 0;
  while ((std::int64_t{1} << levels) < cap) ++levels;
  return std::int64_t{1} << rng.below(static_cast<std::uint64_t>(levels + 1));
}

struct Member {
  std::vector<ModeSet> fields;
  std::string regime;
  std::uint64_t seed;
};

Member scan_member(const RatioScanConfig& cfg, std::int64_t n, bool adversarial,
                   std::size_t k) {
  Member m;
  m.regime = adversarial ? "adversarial" : "random";
  m.seed = k;
  std::uint64_t base = fnv1a64(estimate_name(cfg.kind), cfg.seed);
  Rng pick(base, {static_cast<std::uint64_t>(n), adversarial ? 1u : 0u,
                  static_cast<std::uint64_t>(k)});
  auto field_seed = [&](std::size_t slot) {
    const char* name = estimate_name(cfg.kind);
    return fnv1a64(name, std::strlen(name),
                   cfg.seed ^ (0x9e3779b97f4a7c15ull *
                               (n * 1315423911ull + k * 2654435761ull +
                                (adversarial ? 77ull : 0ull) + slot)));
  };
  const std::size_t arity = cfg.kind == EstimateKind::Trilinear ? 3 : 2;

  if (adversarial) {
    if (cfg.kind == EstimateKind::Trilinear) {
      m.fields.push_back(
          block_concentrated_field(n, 1, 1, cfg.params, field_seed(0)));
      m.fields.push_back(
          block_concentrated_field(n, 1, 1, cfg.params, field_seed(1)));
      m.fields.push_back(
          block_concentrated_field(n, 1, -1, cfg.params, field_seed(2)));
    } else {
      std::int64_t l = std::int64_t{1} << (k % 4);
      m.fields.push_back(
          block_concentrated_field(n, l, 1, cfg.params, field_seed(0)));
      m.fields.push_back(
          block_concentrated_field(n, l, -1, cfg.params, field_seed(1)));
    }
    return m;
  }

  if (cfg.kind == EstimateKind::Bilinear && k >= cfg.n_random / 2) {
    for (std::size_t slot = 0; slot < arity; ++slot) {
      std::int64_t nd = random_dyad(pick, n);
      std::int64_t ld = std::int64_t{1} << pick.below(4);
      int sg = pick.sign() > 0 ? 1 : -1;
      m.fields.push_back(
          block_concentrated_field(nd, ld, sg, cfg.params, field_seed(slot)));
    }
    return m;
  }
  if (cfg.kind == EstimateKind::Trilinear && k >= 2 && k % 2 == 1) {
    for (std::size_t slot = 0; slot < arity; ++slot) {
      std::int64_t nd = random_dyad(pick, std::min<std::int64_t>(n, 8));
      std::int64_t ld = std::int64_t{1} << pick.below(2);
      int sg = pick.sign() > 0 ? 1 : -1;
      m.fields.push_back(
          block_concentrated_field(nd, ld, sg, cfg.params, field_seed(slot)));
    }
    return m;
  }

  // decaying-profile members; k = 0, 1 are the deterministic anchors
  const bool trilin = cfg.kind == EstimateKind::Trilinear;
  const std::int64_t lcap = trilin ? 1 : 3;
  const double keep = trilin ? 0.5 : 1.0;
  double q;
  if (k == 0)
    q = trilin ? 2.5 : 1.5;
  else if (k == 1)
    q = trilin ? 3.0 : 2.0;
  else if (trilin)
    q = 2.0 + 0.5 * static_cast<double>((k / 2) % 3);
  else
    q = (k % 3 == 0) ? 1.5 : (k % 3 == 1 ? 2.0 : 3.0);
  for (std::size_t slot = 0; slot < arity; ++slot)
    m.fields.push_back(smooth_profile_field(n, q, lcap, keep, k < 2,
                                            cfg.params, field_seed(slot)));
  return m;
}

}  // namespace

RatioScanReport ratio_scaling_scan(const RatioScanConfig& cfg) {
  validate(cfg.params);
  if (cfg.s_list.empty() || cfg.n_list.empty())
    throw ConfigError("ratio_scaling_scan: empty sweep");
  for (std::int64_t n : cfg.n_list)
    if (!dyadic(n)) throw ConfigError("ratio_scaling_scan: scales must be dyadic");

  RatioScanReport rep;
  for (std::int64_t n : cfg.n_list) {
    const std::size_t total = cfg.n_random + cfg.n_adversarial;
    for (std::size_t k = 0; k < total; ++k) {
      bool adversarial = k >= cfg.n_random;
      std::size_t idx = adversarial ? k - cfg.n_random : k;
      Member mem = scan_member(cfg, n, adversarial, idx);
      double bcol = cfg.kind == EstimateKind::AsymBilinear ? cfg.eps : cfg.b;

      if (cfg.kind == EstimateKind::Trilinear) {
        // share the double convolution across the s grid
        ModeSet uv = convolve(mem.fields[0], mem.fields[1]);
        auto sq = conv_weighted_sq(uv, mem.fields[2], cfg.s_list, cfg.b - 1.0,
                                   true);
        for (std::size_t si = 0; si < cfg.s_list.size(); ++si) {
          NormSpec ns{cfg.s_list[si], cfg.b};
          double den = xsb_norm(mem.fields[0], ns) *
                       xsb_norm(mem.fields[1], ns) *
                       xsb_norm(mem.fields[2], ns);
          double ratio = kTwoPi * std::sqrt(sq[si]) / den;
          rep.rows.push_back({cfg.kind, cfg.s_list[si], bcol, n, mem.regime,
                              mem.seed, ratio});
        }
      } else {
        ModeSet uv = convolve(mem.fields[0], mem.fields[1]);
        for (double s : cfg.s_list) {
          double ratio;
          if (cfg.kind == EstimateKind::AsymBilinear) {
            double du = xsb_norm(mem.fields[0], NormSpec{-0.5, 0.5 - cfg.eps});
            double dv = xsb_norm(mem.fields[1], NormSpec{s, 0.5 + cfg.eps});
            ratio = kTwoPi * std::sqrt(raw_weighted_sq(uv, 0.0, 0.0, false)) /
                    (du * dv);
          } else {
            NormSpec ns{s, cfg.b};
            double num = kTwoPi *
                         std::sqrt(raw_weighted_sq(uv, s, cfg.b - 1.0, true));
            ratio = num / (xsb_norm(mem.fields[0], ns) *
                           xsb_norm(mem.fields[1], ns));
          }
          rep.rows.push_back({cfg.kind, s, bcol, n, mem.regime, mem.seed,
                              ratio});
        }
      }
    }
  }

  for (double s : cfg.s_list) {
    for (const char* regime : {"all", "random", "adversarial"}) {
      std::vector<double> xs, ys;
      for (std::int64_t n : cfg.n_list) {
        double v = rep.max_ratio(s, n, regime);
        if (v > 0.0) {
          xs.push_back(static_cast<double>(n));
          ys.push_back(v);
        }
      }
      if (xs.size() >= 2)
        rep.slopes.push_back({cfg.kind, s, regime, loglog_slope(xs, ys)});
    }
  }
  return rep;
}

std::string ratio_scan_csv(const RatioScanReport& report) {
  std::string out = "estimate,s,b,N,regime,seed,ratio\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%lld,%s,%llu,%.17g\n",
                  estimate_name(r.estimate), r.s, r.b,
                  static_cast<long long>(r.n_scale), r.regime.c_str(),
                  static_cast<unsigned long long>(r.seed), r.ratio);
    out += buf;
  }
  return out;
}

std::string ratio_scan_json(const RatioScanReport& report) {
  nlohmann::json j;
  nlohmann::json slopes = nlohmann::json::array();
  for (const auto& s : report.slopes) {
    nlohmann::json one;
    one["estimate"] = estimate_name(s.estimate);
    one["s"] = s.s;
    one["regime"] = s.regime;
    one["slope"] = s.slope;
    slopes.push_back(one);
  }
  j["slopes"] = slopes;
  j["rows"] = report.rows.size();
  return j.dump(2);
}

}  // namespace kawalab
