#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "kawalab/blocks.hpp"
#include "kawalab/duhamel.hpp"
#include "kawalab/modeset.hpp"
#include "kawalab/snapshot.hpp"

namespace kawalab {

inline constexpr char kVersion[] = "0.1.0";

// One experiment definition. Common fields are typed; scenario-specific knobs
// live in `scan` and are validated by the owning scenario. The JSON schema is
// documented in the README.
struct ExperimentConfig {
  std::string scenario;
  EquationParams params;
  std::size_t grid_n = 256;
  double box_length = 6.283185307179586476925287;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0 keeps the ambient thread count
  std::string out_dir = "out";
  nlohmann::json scan = nlohmann::json::object();
};

// Strict parse: unknown keys and malformed fields raise ConfigError naming
// the offending field. `seed` is mandatory.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical JSON (sorted keys); parse(serialize(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& cfg);

struct RunManifest {
  std::string scenario;
  std::string config_echo;  // canonical config JSON
  std::map<std::string, std::uint64_t> checksums;  // relative path -> FNV-1a
  std::map<std::string, double> timings_seconds;
  std::string version;
};

std::string manifest_json(const RunManifest& m);

// Dispatches to the owning module, writes the scenario's CSV/JSON artifacts
// under cfg.out_dir and run_manifest.json last. Every other emitted file is
// listed in the manifest with its checksum. Numeric artifacts are a pure
// function of (config, seed).
RunManifest run_scenario(const ExperimentConfig& cfg);

// Random datum with |u0_hat(xi)| proportional to (1+|xi|)^(-s-1/2) up to the
// frequency cutoff, random phases, unit H^s norm.
SpectralField rough_datum(const Grid& grid, double s, std::size_t cutoff,
                          std::uint64_t seed);

struct WellposedRow {
  double s = 0;
  std::size_t cutoff = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  double picard_ratio = 0;  // worst successive-residual ratio
  double persistence = 0;   // sup_t |u(t)|_{H^s} / |u0|_{H^s} on [0, delta/2]
  double lipschitz = 0;
};

struct WellposedReport {
  std::vector<WellposedRow> rows;
};

// Threshold probe: rough data at each (s, cutoff, seed), Picard convergence,
// H^s persistence and data-dependence ratios. The s list must straddle the
// equation's threshold by at least 0.25 on each side.
WellposedReport wellposed_probe(const ExperimentConfig& cfg);

std::string wellposed_csv(const WellposedReport& rep);

}  // namespace kawalab
