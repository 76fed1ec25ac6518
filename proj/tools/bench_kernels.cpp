// Timings for the OpenMP kernels against their serial references. The serial
// paths are the ones the consistency tests trust, so this doubles as a quick
// sanity check that both sides agree.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "CLI11.hpp"
#include "kawalab/blocks.hpp"
#include "kawalab/dispersion.hpp"
#include "kawalab/modeset.hpp"

using namespace kawalab;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

ModeSet random_set(std::size_t n_modes, std::uint64_t seed) {
  Rng rng(seed, {0xbe9cull});
  ModeSet f;
  for (std::size_t i = 0; i < n_modes; ++i) {
    SparseMode m;
    m.xi = static_cast<std::int64_t>(rng.below(257)) - 128;
    m.lambda = static_cast<double>(rng.below(129)) - 64.0;
    m.amp = cd{rng.gauss(), rng.gauss()};
    f.modes.push_back(m);
  }
  canonicalize(f);
  return f;
}

void report(const char* name, double serial_s, double parallel_s,
            double err) {
  std::printf("%-24s serial %8.3f s   parallel %8.3f s   speedup %5.2fx   "
              "max_err %.3g\n",
              name, serial_s, parallel_s,
              parallel_s > 0 ? serial_s / parallel_s : 0.0, err);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel benchmarks: serial reference vs OpenMP"};
  std::size_t modes = 3000;
  std::size_t reps = 3;
  std::uint64_t seed = 7;
  app.add_option("--modes", modes, "modes per operand in the convolution");
  app.add_option("--reps", reps, "repetitions per kernel");
  app.add_option("--seed", seed, "base seed");
  CLI11_PARSE(app, argc, argv);

  // Convolution of sparse mode sets.
  {
    ModeSet a = random_set(modes, seed);
    ModeSet b = random_set(modes, seed + 1);
    ModeSet r_serial, r_parallel;
    auto t0 = clock_type::now();
    for (std::size_t r = 0; r < reps; ++r) r_serial = convolve_serial(a, b);
    double ts = seconds_since(t0) / reps;
    t0 = clock_type::now();
    for (std::size_t r = 0; r < reps; ++r) r_parallel = convolve(a, b);
    double tp = seconds_since(t0) / reps;
    double err = 0;
    for (std::size_t i = 0; i < r_serial.modes.size(); ++i)
      err = std::max(err, std::abs(r_serial.modes[i].amp -
                                   r_parallel.modes[i].amp));
    report("convolve", ts, tp, err);
  }

  // Partial contraction of a discretized block multiplier.
  {
    EquationParams p;
    DyadicBlockSpec spec;
    spec.n1 = 16;
    spec.n2 = 16;
    spec.n3 = 32;
    spec.h = 64.0 * std::pow(16.0, 5);
    spec.l1 = 1;
    spec.l2 = 256;
    spec.l3 = spec.h;
    DiscreteMultiplier m = discretize_block(spec, p, 24);
    std::array<std::vector<double>, 3> f;
    Rng rng(seed, {0xc0ull});
    for (int j = 0; j < 3; ++j) {
      f[j].resize(m.sites[j].size());
      for (auto& v : f[j]) v = rng.gauss();
    }
    std::vector<double> gs, gp;
    auto t0 = clock_type::now();
    for (std::size_t r = 0; r < reps; ++r) gs = contract_slot(m, 2, f, false);
    double ts = seconds_since(t0) / reps;
    t0 = clock_type::now();
    for (std::size_t r = 0; r < reps; ++r) gp = contract_slot(m, 2, f, true);
    double tp = seconds_since(t0) / reps;
    double err = 0;
    for (std::size_t i = 0; i < gs.size(); ++i)
      err = std::max(err, std::abs(gs[i] - gp[i]));
    std::printf("  (block support %zu entries)\n", m.support_cardinality());
    report("contract_slot", ts, tp, err);
  }

  // Resonance floor sampling.
  {
    EquationParams p;
    ResonanceReport rs, rp;
    auto t0 = clock_type::now();
    rs = verify_resonance_bound_serial(p, 256.0, 2048, seed);
    double ts = seconds_since(t0);
    t0 = clock_type::now();
    rp = verify_resonance_bound(p, 256.0, 2048, seed);
    double tp = seconds_since(t0);
    report("resonance_bound", ts, tp,
           std::abs(rs.min_ratio - rp.min_ratio));
  }
  return 0;
}
