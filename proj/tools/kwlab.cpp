#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "kawalab/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for fifth-order dispersive equations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  std::size_t threads_override = 0;
  bool seed_set = false;
  bool threads_set = false;
  std::string chosen;

  const std::vector<std::pair<const char*, const char*>> scenarios = {
      {"solve", "Time-step an initial datum and log conserved quantities"},
      {"resonance-scan",
       "Lower-bound the three-wave resonance over dyadic frequency blocks"},
      {"block-norm", "Estimate restricted multiplier norms on dyadic blocks"},
      {"bilinear-scan", "Scaling of bilinear estimate ratios in the top scale"},
      {"trilinear-scan",
       "Scaling of trilinear estimate ratios in the top scale"},
      {"linear-scan", "Windowed linear and inhomogeneous-term estimates"},
      {"contraction", "Fixed-point iteration and contraction probes"},
      {"wellposed-probe",
       "Rough-data behavior across the regularity threshold"}};

  for (const auto& [name, desc] : scenarios) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("-c,--config", config_path, "JSON experiment config")
        ->required();
    sub->add_option("-o,--out", out_override, "output directory override");
    CLI::Option* so =
        sub->add_option("--seed", seed_override, "seed override");
    CLI::Option* to =
        sub->add_option("--threads", threads_override,
                        "worker thread count override");
    sub->callback([&chosen, &seed_set, &threads_set, name = std::string(name),
                   so, to]() {
      chosen = name;
      seed_set = so->count() > 0;
      threads_set = to->count() > 0;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    kawalab::ExperimentConfig cfg = kawalab::load_config(config_path);
    cfg.scenario = chosen;
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_set) cfg.seed = seed_override;
    if (threads_set) cfg.threads = threads_override;
    kawalab::RunManifest man = kawalab::run_scenario(cfg);
    std::printf("%s: wrote %zu artifacts to %s\n", cfg.scenario.c_str(),
                man.checksums.size() + 1, cfg.out_dir.c_str());
    return 0;
  } catch (const kawalab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const kawalab::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}
