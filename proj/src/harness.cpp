#include "kawalab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kawalab {

namespace {

using nlohmann::json;

bool power_of_two(std::size_t n) { return n >= 8 && (n & (n - 1)) == 0; }

std::string kind_name(EquationKind k) {
  return k == EquationKind::Kawahara ? "kawahara" : "modified";
}

[[noreturn]] void field_error(const std::string& field,
                              const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

void check_keys(const json& obj, const std::string& prefix,
                const std::set<std::string>& allowed) {
  for (const auto& kv : obj.items())
    if (!allowed.count(kv.key()))
      field_error(prefix + kv.key(), "unknown key");
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) field_error(field, "must be a number");
  return j.get<double>();
}

std::uint64_t as_uint(const json& j, const std::string& field) {
  // Values parsed from text arrive as number_unsigned; configs assembled in
  // code usually carry plain ints, so accept any nonnegative integer.
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  field_error(field, "must be a nonnegative integer");
}

// Reads scenario knobs out of cfg.scan with field-level messages and strict
// key checking against the scenario's vocabulary.
struct ScanReader {
  const json& scan;

  double num(const char* key, double dflt) const {
    if (!scan.contains(key)) return dflt;
    return as_number(scan.at(key), std::string("scan.") + key);
  }
  std::size_t uint(const char* key, std::size_t dflt) const {
    if (!scan.contains(key)) return dflt;
    return static_cast<std::size_t>(
        as_uint(scan.at(key), std::string("scan.") + key));
  }
  std::string str(const char* key, const std::string& dflt) const {
    if (!scan.contains(key)) return dflt;
    const json& v = scan.at(key);
    if (!v.is_string()) field_error(std::string("scan.") + key, "must be a string");
    return v.get<std::string>();
  }
  std::vector<double> num_list(const char* key,
                               std::vector<double> dflt) const {
    if (!scan.contains(key)) return dflt;
    const json& v = scan.at(key);
    if (!v.is_array() || v.empty())
      field_error(std::string("scan.") + key, "must be a nonempty array");
    std::vector<double> out;
    for (const auto& e : v)
      out.push_back(as_number(e, std::string("scan.") + key + "[]"));
    return out;
  }
};

std::uint64_t checksum_text(const std::string& content) {
  return fnv1a64(content.data(), content.size());
}

std::uint64_t checksum_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checksum: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return checksum_text(bytes);
}

struct Emitter {
  std::string dir;
  RunManifest man;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  explicit Emitter(const ExperimentConfig& cfg) : dir(cfg.out_dir) {
    man.scenario = cfg.scenario;
    man.config_echo = serialize_config(cfg);
    man.version = kVersion;
    std::filesystem::create_directories(dir);
  }

  void write_text(const std::string& rel, const std::string& content) {
    std::filesystem::path p = std::filesystem::path(dir) / rel;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << content;
    man.checksums[rel] = checksum_text(content);
  }

  // Register files some module wrote underneath `rel` on its own.
  void note_tree(const std::string& rel) {
    std::filesystem::path root = std::filesystem::path(dir) / rel;
    std::vector<std::string> rels;
    for (const auto& e :
         std::filesystem::recursive_directory_iterator(root))
      if (e.is_regular_file())
        rels.push_back(
            std::filesystem::relative(e.path(), dir).generic_string());
    std::sort(rels.begin(), rels.end());
    for (const auto& r : rels)
      man.checksums[r] = checksum_file(dir + "/" + r);
  }

  void stamp(const std::string& phase) {
    auto now = std::chrono::steady_clock::now();
    man.timings_seconds[phase] =
        std::chrono::duration<double>(now - start).count();
  }

  void finish() {
    stamp("total");
    std::ofstream out(std::filesystem::path(dir) / "run_manifest.json",
                      std::ios::trunc);
    if (!out) throw ConfigError("cannot write run manifest");
    out << manifest_json(man) << "\n";
  }
};

SpectralField make_datum(const Grid& g, const json& spec,
                         const EquationParams& params, std::uint64_t seed) {
  if (!spec.is_object()) field_error("scan.data", "must be an object");
  std::string type = spec.value("type", std::string("zero"));
  if (type == "zero") {
    check_keys(spec, "scan.data.", {"type"});
    return zero_field(g);
  }
  if (type == "cosine") {
    check_keys(spec, "scan.data.", {"type", "amplitude", "mode"});
    double a = spec.value("amplitude", 1.0);
    int k = spec.value("mode", 1);
    if (k < 1 || static_cast<std::size_t>(k) >= g.n / 2)
      field_error("scan.data.mode", "must lie inside the grid band");
    SpectralField u = zero_field(g);
    u.at_wavenumber(k) = cd{0.5 * a, 0.0};
    u.at_wavenumber(-k) = cd{0.5 * a, 0.0};
    return u;
  }
  if (type == "random") {
    check_keys(spec, "scan.data.", {"type", "amplitude", "decay"});
    double a = spec.value("amplitude", 1.0);
    double q = spec.value("decay", 2.0);
    SpectralField u = zero_field(g);
    Rng rng(seed, {0x5afedull});
    for (std::size_t k = 1; k <= g.n / 4; ++k) {
      double mag = std::pow(1.0 + static_cast<double>(k), -q);
      cd c{rng.gauss() * mag, rng.gauss() * mag};
      u.coeff[g.index_of(static_cast<int>(k))] = c;
      u.coeff[g.index_of(-static_cast<int>(k))] = std::conj(c);
    }
    double nrm = hs_norm(u, 0.0);
    if (nrm > 0)
      for (auto& c : u.coeff) c *= a / nrm;
    return u;
  }
  if (type == "soliton") {
    check_keys(spec, "scan.data.", {"type", "speed"});
    double c = spec.value("speed", 1.0);
    RealField guess;
    guess.grid = g;
    guess.values.resize(g.n);
    double w = 0.5 * std::pow(std::abs(c) / std::max(1e-8, std::abs(params.beta)),
                              0.25);
    for (std::size_t j = 0; j < g.n; ++j) {
      double x = g.x(j) - 0.5 * g.box_length;
      double sech = 1.0 / std::cosh(w * x);
      guess.values[j] = sech * sech;
    }
    TravelingWave tw =
        traveling_wave_petviashvili(to_spectral(guess), c, params);
    return tw.profile;
  }
  if (type == "file") {
    check_keys(spec, "scan.data.", {"type", "path"});
    if (!spec.contains("path")) field_error("scan.data.path", "required");
    return load_snapshot(spec.at("path").get<std::string>());
  }
  field_error("scan.data.type", "unknown type '" + type + "'");
}

// ---------------------------------------------------------------- scenarios

void run_solve(const ExperimentConfig& cfg, Emitter& em) {
  ScanReader rd{cfg.scan};
  check_keys(cfg.scan, "scan.",
             {"T", "dt", "sample_every", "data"});
  double T = rd.num("T", 1.0);
  double dt = rd.num("dt", 1e-3);
  std::size_t every = rd.uint("sample_every", 16);
  Grid g = make_grid(cfg.grid_n, cfg.box_length);
  SpectralField u0 = make_datum(
      g, cfg.scan.value("data", json{{"type", "zero"}}), cfg.params, cfg.seed);

  SolveOptions opt;
  opt.sample_every = every;
  Trajectory traj = solve(u0, T, dt, cfg.params, opt);
  em.stamp("solve");

  save_trajectory(em.dir + "/trajectory", traj);
  em.note_tree("trajectory");

  std::string csv = "t,mass,l2,hamiltonian\n";
  char buf[256];
  Invariants first{};
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    Invariants inv = invariants(traj.states[i], cfg.params);
    if (i == 0) first = inv;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", traj.times[i],
                  inv.mass, inv.l2, inv.hamiltonian);
    csv += buf;
  }
  em.write_text("invariants.csv", csv);

  Invariants last = invariants(traj.states.back(), cfg.params);
  json summary;
  summary["samples"] = traj.states.size();
  summary["final_time"] = traj.times.back();
  summary["mass_drift"] = std::abs(last.mass - first.mass);
  summary["l2_drift"] = std::abs(last.l2 - first.l2);
  summary["hamiltonian_drift"] = std::abs(last.hamiltonian - first.hamiltonian);
  em.write_text("summary.json", summary.dump(2));
}

void run_resonance(const ExperimentConfig& cfg, Emitter& em) {
  ScanReader rd{cfg.scan};
  check_keys(cfg.scan, "scan.",
             {"n_cap", "samples_per_block", "points_per_dyad", "param_list"});
  double n_cap = rd.num("n_cap", 1024.0);
  std::uint64_t samples = rd.uint("samples_per_block", 4096);
  std::size_t lattice_pts = rd.uint("points_per_dyad", 32);

  std::vector<EquationParams> plist;
  if (cfg.scan.contains("param_list")) {
    const json& v = cfg.scan.at("param_list");
    if (!v.is_array() || v.empty())
      field_error("scan.param_list", "must be a nonempty array");
    for (const auto& e : v) {
      EquationParams p = cfg.params;
      p.alpha = as_number(e.at("alpha"), "scan.param_list[].alpha");
      p.beta = as_number(e.at("beta"), "scan.param_list[].beta");
      plist.push_back(p);
    }
  } else {
    plist.push_back(cfg.params);
  }

  std::string csv =
      "alpha,beta,n_cap,samples_per_block,total_samples,min_ratio,xi1,xi2,"
      "xi3\n";
  char buf[512];
  double global_min = std::numeric_limits<double>::infinity();
  json per = json::array();
  for (const auto& p : plist) {
    ResonanceReport rep = verify_resonance_bound(p, n_cap, samples, cfg.seed);
    double lattice_min =
        lattice_pts ? resonance_min_lattice(p, n_cap, lattice_pts) : 0.0;
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%llu,%llu,%.17g,%.17g,%.17g,%.17g\n",
                  p.alpha, p.beta, rep.n_cap,
                  static_cast<unsigned long long>(rep.samples_per_block),
                  static_cast<unsigned long long>(rep.total_samples),
                  rep.min_ratio, rep.argmin.xi1, rep.argmin.xi2,
                  rep.argmin.xi3);
    csv += buf;
    global_min = std::min(global_min, rep.min_ratio);
    json one;
    one["alpha"] = p.alpha;
    one["beta"] = p.beta;
    one["min_ratio"] = rep.min_ratio;
    one["lattice_min"] = lattice_min;
    per.push_back(one);
  }
  em.write_text("resonance.csv", csv);
  json summary;
  summary["min_ratio"] = global_min;
  summary["per_params"] = per;
  em.write_text("resonance.json", summary.dump(2));
}

void run_block_norm(const ExperimentConfig& cfg, Emitter& em) {
  ScanReader rd{cfg.scan};
  check_keys(cfg.scan, "scan.",
             {"family", "cells_per_dyad", "restarts", "n_list", "lmin_list",
              "lmed_list", "n", "l2_list"});
  std::string family = rd.str("family", "plusplus");
  std::size_t cells = rd.uint("cells_per_dyad", 32);
  std::size_t restarts = rd.uint("restarts", 16);

  std::vector<DyadicBlockSpec> scan;
  if (family == "plusplus") {
    scan = plusplus_scan_family(rd.num_list("n_list", {4, 8, 16, 32}),
                                rd.num_list("lmin_list", {1, 4, 16, 64}),
                                rd.num_list("lmed_list", {1, 4, 16, 64}));
  } else if (family == "plusminus") {
    scan = plusminus_scan_family(
        rd.num("n", 8.0),
        rd.num_list("l2_list", {256, 1024, 4096, 8192, 16384, 32768}));
  } else {
    field_error("scan.family", "must be 'plusplus' or 'plusminus'");
  }
  BlockScanReport rep =
      verify_block_estimates(scan, cfg.params, cells, restarts, cfg.seed);
  em.write_text("blocks.csv", block_report_csv(rep));
  em.write_text("blocks.json", block_report_json(rep));
}

void run_ratio_scan(const ExperimentConfig& cfg, Emitter& em,
                    EstimateKind default_kind) {
  ScanReader rd{cfg.scan};
  check_keys(cfg.scan, "scan.",
             {"s_list", "n_list", "b", "eps", "n_random", "n_adversarial",
              "estimate"});
  RatioScanConfig rc;
  rc.params = cfg.params;
  rc.seed = cfg.seed;
  rc.kind = default_kind;
  if (default_kind == EstimateKind::Bilinear) {
    std::string est = rd.str("estimate", "standard");
    if (est == "asym")
      rc.kind = EstimateKind::AsymBilinear;
    else if (est != "standard")
      field_error("scan.estimate", "must be 'standard' or 'asym'");
  }
  bool tri = default_kind == EstimateKind::Trilinear;
  rc.s_list = rd.num_list("s_list", tri ? std::vector<double>{0.0, -0.25}
                                        : std::vector<double>{-1.0, -2.5});
  for (double n : rd.num_list("n_list", {4, 8, 16, 32, 64, 128})) {
    if (n < 1 || std::exp2(std::round(std::log2(n))) != n)
      field_error("scan.n_list", "entries must be dyadic scales");
    rc.n_list.push_back(static_cast<std::int64_t>(n));
  }
  rc.b = rd.num("b", tri ? 0.55 : 0.6);
  rc.eps = rd.num("eps", 0.05);
  rc.n_random = rd.uint("n_random", tri ? 20 : 100);
  rc.n_adversarial = rd.uint("n_adversarial", tri ? 6 : 20);

  RatioScanReport rep = ratio_scaling_scan(rc);
  em.write_text("ratios.csv", ratio_scan_csv(rep));
  em.write_text("ratios.json", ratio_scan_json(rep));
}

void run_linear_scan(const ExperimentConfig& cfg, Emitter& em) {
  ScanReader rd{cfg.scan};
  check_keys(cfg.scan, "scan.",
             {"s", "b_list", "delta_list", "ensemble", "n_tau",
              "time_window"});
  double s = rd.num("s", 0.0);
  std::vector<double> b_list = rd.num_list("b_list", {0.55, 0.6, 0.75});
  std::vector<double> deltas =
      rd.num_list("delta_list", {0.5, 0.25, 0.125, 0.0625, 0.03125});
  std::size_t ensemble = rd.uint("ensemble", 6);
  std::size_t n_tau = rd.uint("n_tau", 2048);
  double window = rd.num("time_window", 2.0);

  Grid g = make_grid(cfg.grid_n, cfg.box_length);
  LinearEstimateReport rep = verify_linear_estimates(
      g, cfg.params, s, b_list, deltas, ensemble, cfg.seed, n_tau, window);

  std::string csv = "delta,b,s,datum,ratio_homogeneous,ratio_duhamel\n";
  char buf[256];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%llu,%.17g,%.17g\n",
                  r.delta, r.b, r.s,
                  static_cast<unsigned long long>(r.datum),
                  r.ratio_homogeneous, r.ratio_duhamel);
    csv += buf;
  }
  em.write_text("linear.csv", csv);

  json summary;
  json slopes = json::array();
  for (std::size_t i = 0; i < b_list.size(); ++i) {
    json one;
    one["b"] = b_list[i];
    one["homogeneous_slope"] = rep.homogeneous_slopes[i];
    slopes.push_back(one);
  }
  summary["homogeneous_slopes"] = slopes;
  em.write_text("linear.json", summary.dump(2));
}

void run_contraction(const ExperimentConfig& cfg, Emitter& em) {
  ScanReader rd{cfg.scan};
  check_keys(cfg.scan, "scan.",
             {"s", "b", "delta_list", "probes", "k_max", "tol", "data"});
  NormSpec norm{rd.num("s", 0.0), rd.num("b", 0.6)};
  std::vector<double> deltas =
      rd.num_list("delta_list", {0.25, 0.125, 0.0625, 0.03125});
  std::size_t probes = rd.uint("probes", 6);
  std::size_t k_max = rd.uint("k_max", 16);
  double tol = rd.num("tol", 1e-9);

  Grid g = make_grid(cfg.grid_n, cfg.box_length);
  SpectralField u0 = make_datum(
      g,
      cfg.scan.value("data",
                     json{{"type", "random"}, {"amplitude", 0.5},
                          {"decay", 2.0}}),
      cfg.params, cfg.seed);

  std::string csv = "delta,b,s,probe_factor,picard_ratio,converged,iterations\n";
  char buf[256];
  json reports = json::array();
  for (double delta : deltas) {
    CutoffSpec cut{delta};
    auto [traj, rep] =
        picard_iterate(u0, cut, cfg.params, norm, k_max, tol);
    (void)traj;
    double probe =
        contraction_factor(u0, cut, cfg.params, norm, probes, cfg.seed);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%zu\n",
                  delta, norm.b, norm.s, probe, rep.contraction_factor,
                  rep.converged ? 1 : 0, rep.residuals.size());
    csv += buf;
    json one = json::parse(fixed_point_report_json(rep));
    one["delta"] = delta;
    one["probe_factor"] = probe;
    reports.push_back(one);
  }
  em.write_text("contraction.csv", csv);
  em.write_text("fixed_point.json", json(reports).dump(2));
}

void run_wellposed(const ExperimentConfig& cfg, Emitter& em) {
  WellposedReport rep = wellposed_probe(cfg);
  em.write_text("wellposed.csv", wellposed_csv(rep));

  json summary = json::array();
  for (const auto& r : rep.rows) {
    json one;
    one["s"] = r.s;
    one["cutoff"] = r.cutoff;
    one["seed"] = r.seed;
    one["converged"] = r.converged;
    one["lipschitz"] = r.lipschitz;
    summary.push_back(one);
  }
  em.write_text("wellposed.json", json(summary).dump(2));
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }
  if (!j.is_object())
    throw ConfigError("config: top level must be a JSON object");
  check_keys(j, "",
             {"scenario", "equation", "grid", "seed", "threads", "out",
              "scan"});

  ExperimentConfig c;
  if (j.contains("scenario")) {
    if (!j.at("scenario").is_string())
      field_error("scenario", "must be a string");
    c.scenario = j.at("scenario").get<std::string>();
  }
  if (j.contains("equation")) {
    const json& e = j.at("equation");
    if (!e.is_object()) field_error("equation", "must be an object");
    check_keys(e, "equation.", {"kind", "alpha", "beta"});
    std::string kind = e.value("kind", std::string("kawahara"));
    if (kind == "kawahara")
      c.params.kind = EquationKind::Kawahara;
    else if (kind == "modified")
      c.params.kind = EquationKind::ModifiedKawahara;
    else
      field_error("equation.kind", "must be 'kawahara' or 'modified'");
    if (e.contains("alpha"))
      c.params.alpha = as_number(e.at("alpha"), "equation.alpha");
    if (e.contains("beta"))
      c.params.beta = as_number(e.at("beta"), "equation.beta");
    if (c.params.beta == 0.0) field_error("equation.beta", "must be nonzero");
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    if (!g.is_object()) field_error("grid", "must be an object");
    check_keys(g, "grid.", {"n", "box_length"});
    if (g.contains("n"))
      c.grid_n = static_cast<std::size_t>(as_uint(g.at("n"), "grid.n"));
    if (!power_of_two(c.grid_n))
      field_error("grid.n", "must be a power of two >= 8");
    if (g.contains("box_length"))
      c.box_length = as_number(g.at("box_length"), "grid.box_length");
    if (!(c.box_length > 0)) field_error("grid.box_length", "must be positive");
  }
  if (!j.contains("seed")) field_error("seed", "required");
  c.seed = as_uint(j.at("seed"), "seed");
  if (j.contains("threads"))
    c.threads = static_cast<std::size_t>(as_uint(j.at("threads"), "threads"));
  if (j.contains("out")) {
    if (!j.at("out").is_string() || j.at("out").get<std::string>().empty())
      field_error("out", "must be a nonempty string");
    c.out_dir = j.at("out").get<std::string>();
  }
  if (j.contains("scan")) {
    if (!j.at("scan").is_object()) field_error("scan", "must be an object");
    c.scan = j.at("scan");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json j;
  if (!cfg.scenario.empty()) j["scenario"] = cfg.scenario;
  j["equation"] = {{"kind", kind_name(cfg.params.kind)},
                   {"alpha", cfg.params.alpha},
                   {"beta", cfg.params.beta}};
  j["grid"] = {{"n", cfg.grid_n}, {"box_length", cfg.box_length}};
  j["seed"] = cfg.seed;
  if (cfg.threads) j["threads"] = cfg.threads;
  j["out"] = cfg.out_dir;
  j["scan"] = cfg.scan;
  return j.dump(2);
}

std::string manifest_json(const RunManifest& m) {
  json j;
  j["scenario"] = m.scenario;
  j["version"] = m.version;
  j["config"] = json::parse(m.config_echo);
  json sums = json::object();
  for (const auto& kv : m.checksums) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(kv.second));
    sums[kv.first] = buf;
  }
  j["checksums"] = sums;
  j["timings_seconds"] = m.timings_seconds;
  return j.dump(2);
}

SpectralField rough_datum(const Grid& grid, double s, std::size_t cutoff,
                          std::uint64_t seed) {
  if (cutoff < 1 || cutoff >= grid.n / 2)
    throw ConfigError("rough_datum: cutoff must lie inside the grid band");
  SpectralField u = zero_field(grid);
  Rng rng(seed, {0xda7a5ull, cutoff});
  const double tau = 6.283185307179586476925287;
  for (std::size_t k = 1; k <= cutoff; ++k) {
    double mag = std::pow(1.0 + static_cast<double>(k), -s - 0.5);
    double phase = tau * rng.uniform();
    cd c = mag * std::exp(cd{0.0, phase});
    u.coeff[grid.index_of(static_cast<int>(k))] = c;
    u.coeff[grid.index_of(-static_cast<int>(k))] = std::conj(c);
  }
  double nrm = hs_norm(u, s);
  if (nrm > 0)
    for (auto& c : u.coeff) c /= nrm;
  return u;
}

WellposedReport wellposed_probe(const ExperimentConfig& cfg) {
  ScanReader rd{cfg.scan};
  check_keys(cfg.scan, "scan.",
             {"s_list", "cutoff_list", "n_seeds", "delta", "b",
              "perturbation", "k_max"});
  std::vector<double> s_list = rd.num_list("s_list", {});
  if (s_list.empty()) field_error("scan.s_list", "required");
  const double threshold =
      cfg.params.kind == EquationKind::Kawahara ? -1.75 : -0.25;
  double lo = *std::min_element(s_list.begin(), s_list.end());
  double hi = *std::max_element(s_list.begin(), s_list.end());
  if (lo > threshold - 0.25 + 1e-12 || hi < threshold + 0.25 - 1e-12)
    field_error("scan.s_list",
                "must straddle the threshold by at least 0.25 on each side");

  std::vector<double> cutoffs = rd.num_list("cutoff_list", {8, 16, 32, 64});
  std::size_t n_seeds = rd.uint("n_seeds", 4);
  double delta = rd.num("delta", 0.0625);
  double b = rd.num("b", 0.6);
  double pert = rd.num("perturbation", 1e-3);
  std::size_t k_max = rd.uint("k_max", 20);

  Grid g = make_grid(cfg.grid_n, cfg.box_length);
  CutoffSpec cut{delta};
  WellposedReport rep;
  for (double s : s_list) {
    NormSpec norm{s, b};
    for (double cut_f : cutoffs) {
      auto cutoff = static_cast<std::size_t>(cut_f);
      for (std::size_t r = 0; r < n_seeds; ++r) {
        std::uint64_t row_seed = cfg.seed + 1000003ull * r;
        WellposedRow row;
        row.s = s;
        row.cutoff = cutoff;
        row.seed = row_seed;
        SpectralField u0 = rough_datum(g, s, cutoff, row_seed);
        try {
          auto [traj, fp] =
              picard_iterate(u0, cut, cfg.params, norm, k_max, 1e-9);
          row.converged = fp.converged;
          row.picard_ratio = fp.contraction_factor;
          double sup = 0;
          for (std::size_t j = 0; j < traj.times.size(); ++j)
            if (traj.times[j] >= -1e-12 &&
                traj.times[j] <= 0.5 * delta + 1e-12)
              sup = std::max(sup, hs_norm(traj.states[j], s));
          row.persistence = sup;
          SpectralField v0 = u0;
          SpectralField bump = rough_datum(g, s, cutoff, row_seed ^ 0x5eedull);
          for (std::size_t i = 0; i < v0.coeff.size(); ++i)
            v0.coeff[i] += pert * bump.coeff[i];
          row.lipschitz =
              lipschitz_data_dependence(u0, v0, cut, cfg.params, norm);
        } catch (const NumericalError&) {
          row.converged = false;
          row.picard_ratio = std::numeric_limits<double>::infinity();
          row.persistence = 0.0;
          row.lipschitz = std::numeric_limits<double>::infinity();
        }
        rep.rows.push_back(row);
      }
    }
  }
  return rep;
}

std::string wellposed_csv(const WellposedReport& rep) {
  std::string csv = "s,cutoff,seed,converged,picard_ratio,persistence,lipschitz\n";
  char buf[256];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%zu,%llu,%d,%.17g,%.17g,%.17g\n",
                  r.s, r.cutoff, static_cast<unsigned long long>(r.seed),
                  r.converged ? 1 : 0, r.picard_ratio, r.persistence,
                  r.lipschitz);
    csv += buf;
  }
  return csv;
}

RunManifest run_scenario(const ExperimentConfig& cfg) {
  static const std::set<std::string> kScenarios = {
      "solve",          "resonance-scan", "block-norm", "bilinear-scan",
      "trilinear-scan", "linear-scan",    "contraction", "wellposed-probe"};
  if (!kScenarios.count(cfg.scenario))
    field_error("scenario", "unknown scenario '" + cfg.scenario + "'");
  validate(cfg.params);
  if (!power_of_two(cfg.grid_n))
    field_error("grid.n", "must be a power of two >= 8");
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(static_cast<int>(cfg.threads));
#endif

  Emitter em(cfg);
  try {
    if (cfg.scenario == "solve")
      run_solve(cfg, em);
    else if (cfg.scenario == "resonance-scan")
      run_resonance(cfg, em);
    else if (cfg.scenario == "block-norm")
      run_block_norm(cfg, em);
    else if (cfg.scenario == "bilinear-scan")
      run_ratio_scan(cfg, em, EstimateKind::Bilinear);
    else if (cfg.scenario == "trilinear-scan")
      run_ratio_scan(cfg, em, EstimateKind::Trilinear);
    else if (cfg.scenario == "linear-scan")
      run_linear_scan(cfg, em);
    else if (cfg.scenario == "contraction")
      run_contraction(cfg, em);
    else
      run_wellposed(cfg, em);
  } catch (const NumericalError& e) {
    throw NumericalError("scenario '" + cfg.scenario + "': " + e.what());
  }
  em.finish();
  return em.man;
}

}  // namespace kawalab
