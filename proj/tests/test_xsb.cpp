#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "kawalab/duhamel.hpp"
#include "kawalab/modeset.hpp"
#include "kawalab/spacetime.hpp"
#include "oracles.hpp"

using namespace kawalab;

namespace {

constexpr double kPi = 3.141592653589793238462643;

ModeSet small_random_set(std::size_t count, std::int64_t xi_cap,
                         std::int64_t lam_cap, const EquationParams& params,
                         std::uint64_t seed) {
  Rng rng(seed, {0x5e7ull});
  ModeSet f;
  f.params = params;
  for (std::size_t i = 0; i < count; ++i) {
    SparseMode m;
    m.xi = static_cast<std::int64_t>(rng.below(2 * xi_cap + 1)) - xi_cap;
    m.lambda = static_cast<double>(
        static_cast<std::int64_t>(rng.below(2 * lam_cap + 1)) - lam_cap);
    m.amp = cd{rng.gauss(), rng.gauss()};
    f.modes.push_back(m);
  }
  canonicalize(f);
  return f;
}

}  // namespace

TEST_CASE("sparse norm closed form on a single mode") {
  EquationParams p;
  ModeSet f;
  f.params = p;
  f.modes.push_back({3, 2.0, cd{1.0, 0.0}});
  NormSpec norm{-0.5, 0.6};
  double expect = 2.0 * kPi *
                  std::pow(4.0, -0.5) * std::pow(3.0, 0.6);
  CHECK(xsb_norm(f, norm) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("canonicalize merges duplicates and drops zeros") {
  ModeSet f;
  f.modes.push_back({2, 1.0, cd{1.0, 0.0}});
  f.modes.push_back({2, 1.0, cd{-1.0, 0.0}});
  f.modes.push_back({1, 0.0, cd{0.5, 0.5}});
  canonicalize(f);
  REQUIRE(f.modes.size() == 1);
  CHECK(f.modes[0].xi == 1);
}

TEST_CASE("normalize_mass gives unit space-time L2") {
  EquationParams p;
  ModeSet f = small_random_set(25, 6, 5, p, 17);
  normalize_mass(f);
  CHECK(xsb_norm(f, {0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
  ModeSet empty;
  CHECK_THROWS_AS(normalize_mass(empty), ConfigError);
}

TEST_CASE("sparse convolution matches the brute-force reference") {
  EquationParams p;
  p.alpha = 1.0;
  p.beta = -1.0;
  ModeSet u = small_random_set(18, 5, 6, p, 31);
  ModeSet v = small_random_set(15, 5, 6, p, 32);
  ModeSet got = convolve(u, v);
  ModeSet want = oracles::convolve_reference(u, v);
  REQUIRE(got.modes.size() == want.modes.size());
  for (std::size_t i = 0; i < got.modes.size(); ++i) {
    CHECK(got.modes[i].xi == want.modes[i].xi);
    CHECK(got.modes[i].lambda == want.modes[i].lambda);
    CHECK(std::abs(got.modes[i].amp - want.modes[i].amp) < 1e-12);
  }
}

TEST_CASE("convolution shifts modulation by the resonance") {
  EquationParams p;
  ModeSet u, v;
  u.params = v.params = p;
  u.modes.push_back({2, 1.0, cd{1.0, 0.0}});
  v.modes.push_back({3, -2.0, cd{1.0, 0.0}});
  ModeSet w = convolve(u, v);
  REQUIRE(w.modes.size() == 1);
  CHECK(w.modes[0].xi == 5);
  CHECK(w.modes[0].lambda == -1.0 + resonance_h(2.0, 3.0, p));
}

TEST_CASE("dense and sparse norms agree through densify") {
  EquationParams p;
  Grid g = make_grid(32, 2.0 * kPi);
  ModeSet f = small_random_set(20, 3, 4, p, 41);
  SpaceTimeField dense = densify(f, g, 2048);
  for (auto spec : {NormSpec{0.0, 0.0}, NormSpec{-1.0, 0.6},
                    NormSpec{0.5, -0.4}}) {
    double sp = xsb_norm(f, spec);
    double dn = xsb_norm(dense, spec, p);
    CHECK(sp == doctest::Approx(dn).epsilon(1e-10));
  }
  CHECK(l2_norm(dense) == doctest::Approx(xsb_norm(f, {0.0, 0.0})).epsilon(1e-10));
}

TEST_CASE("densify rejects off-lattice modes") {
  EquationParams p;
  Grid g = make_grid(32, 2.0 * kPi);
  ModeSet f;
  f.params = p;
  f.modes.push_back({3, 0.5, cd{1.0, 0.0}});  // tau lands off the lattice
  CHECK_THROWS_AS(densify(f, g, 2048), ConfigError);
  ModeSet far;
  far.params = p;
  far.modes.push_back({40, 0.0, cd{1.0, 0.0}});  // outside the spatial band
  CHECK_THROWS_AS(densify(far, g, 2048), ConfigError);
}

TEST_CASE("dense product equals sparse convolution on the lattice") {
  EquationParams p;
  Grid g = make_grid(32, 2.0 * kPi);
  ModeSet u = small_random_set(10, 2, 4, p, 51);
  ModeSet v = small_random_set(10, 2, 4, p, 52);
  ModeSet uv = convolve(u, v);
  SpaceTimeField dense_prod =
      spacetime_product(densify(u, g, 2048), densify(v, g, 2048));
  SpaceTimeField expect = densify(uv, g, 2048);
  double err = 0, scale = 0;
  for (std::size_t i = 0; i < expect.amp.size(); ++i) {
    err = std::max(err, std::abs(dense_prod.amp[i] - expect.amp[i]));
    scale = std::max(scale, std::abs(expect.amp[i]));
  }
  REQUIRE(scale > 0);
  CHECK(err < 1e-10 * scale);
}

TEST_CASE("estimate ratios agree between sparse and dense paths") {
  EquationParams p;
  Grid g = make_grid(32, 2.0 * kPi);
  ModeSet u = small_random_set(12, 2, 4, p, 61);
  ModeSet v = small_random_set(12, 2, 4, p, 62);
  NormSpec norm{-1.0, 0.6};
  double sparse = bilinear_ratio(u, v, norm);
  double dense =
      bilinear_ratio(densify(u, g, 2048), densify(v, g, 2048), norm, p);
  CHECK(sparse == doctest::Approx(dense).epsilon(1e-9));

  double sparse_asym = asym_bilinear_ratio(u, v, -0.25, 0.05);
  double dense_asym = asym_bilinear_ratio(densify(u, g, 2048),
                                          densify(v, g, 2048), -0.25, 0.05, p);
  CHECK(sparse_asym == doctest::Approx(dense_asym).epsilon(1e-9));
}

TEST_CASE("trilinear ratio deterministic and positive") {
  EquationParams p;
  ModeSet u = small_random_set(10, 3, 3, p, 71);
  ModeSet v = small_random_set(10, 3, 3, p, 72);
  ModeSet w = small_random_set(10, 3, 3, p, 73);
  NormSpec norm{0.0, 0.55};
  double r1 = trilinear_ratio(u, v, w, norm);
  double r2 = trilinear_ratio(u, v, w, norm);
  CHECK(r1 > 0.0);
  CHECK(r1 == r2);
}

TEST_CASE("off surface fraction splits mass by modulation distance") {
  EquationParams p;
  Grid g = make_grid(32, 2.0 * kPi);
  ModeSet f;
  f.params = p;
  f.modes.push_back({2, 0.0, cd{1.0, 0.0}});    // exactly on the surface
  f.modes.push_back({1, 500.0, cd{1.0, 0.0}});  // far off it
  SpaceTimeField dense = densify(f, g, 2048);
  CHECK(off_surface_fraction(dense, 10.0, p) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(off_surface_fraction(dense, 1000.0, p) == 0.0);
}

TEST_CASE("windowed single linear mode concentrates on the surface") {
  Grid g = make_grid(32, 2.0 * kPi);
  EquationParams p;
  CutoffSpec cut{0.5};
  Trajectory traj = window_lattice_trajectory(g, cut, p, 257);
  for (std::size_t j = 0; j < traj.times.size(); ++j)
    traj.states[j].at_wavenumber(2) =
        std::exp(cd{0.0, traj.times[j] * symbol_p(2.0, p)});

  SpaceTimeField f = spacetime_spectrum(traj, cut, 1024, 4.0 * cut.delta);
  CHECK(off_surface_fraction(f, 40.0 / cut.delta, p) < 0.05);

  // Space-time L2 equals the window's own L2 mass, computed by direct
  // quadrature of bump_psi^2 on a fine lattice.
  double win = 0;
  std::size_t nq = 200000;
  for (std::size_t i = 0; i < nq; ++i) {
    double t = -1.0 + 2.0 * (static_cast<double>(i) + 0.5) / nq;
    win += bump_psi(t) * bump_psi(t);
  }
  win *= 2.0 * cut.delta / static_cast<double>(nq);
  double expect = std::sqrt(g.box_length * win);
  // The spectrum resamples the 257-point trajectory by linear interpolation;
  // with the mode phase advancing |p(2)| h ~ 0.09 rad per lattice step the
  // chord error caps the agreement near (0.09)^2/8 ~ 1e-3.
  CHECK(xsb_norm(f, {0.0, 0.0}, p) == doctest::Approx(expect).epsilon(2e-3));
}

TEST_CASE("windowed spectrum is stable under time refinement") {
  Grid g = make_grid(32, 2.0 * kPi);
  EquationParams p;
  CutoffSpec cut{0.25};
  Rng rng(5, {0xabcull});
  SpectralField u0 = zero_field(g);
  // Modes above 2 rotate too fast for the 257-point trajectory lattice
  // (|p(4)| h ~ 1.9 rad per step); the interpolation noise they inject is
  // amplified by the (1+|tau - p|)^(2b) weight, so keep the datum resolved.
  for (int k = 1; k <= 2; ++k) {
    cd c = cd{rng.gauss(), rng.gauss()} * std::exp(-0.5 * k);
    u0.at_wavenumber(k) = c;
    u0.at_wavenumber(-k) = std::conj(c);
  }
  auto windowed = [&](std::size_t n_tau) {
    Trajectory traj = window_lattice_trajectory(g, cut, p, 257);
    for (std::size_t j = 0; j < traj.times.size(); ++j)
      traj.states[j] = linear_flow(u0, traj.times[j], p);
    return xsb_norm(spacetime_spectrum(traj, cut, n_tau, 4.0 * cut.delta),
                    {0.0, 0.6}, p);
  };
  double coarse = windowed(512);
  double fine = windowed(1024);
  CHECK(std::abs(coarse - fine) < 0.02 * fine);
}

TEST_CASE("block concentrated fields live on their blocks") {
  EquationParams p;
  ModeSet f = block_concentrated_field(4, 2, -1, p, 99);
  CHECK(xsb_norm(f, {0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& m : f.modes) {
    CHECK(-m.xi >= 4);
    CHECK(-m.xi < 8);
    CHECK(std::abs(m.lambda) >= 2);
    CHECK(std::abs(m.lambda) < 4);
  }
  ModeSet g1 = block_concentrated_field(4, 2, -1, p, 99);
  REQUIRE(g1.modes.size() == f.modes.size());
  for (std::size_t i = 0; i < f.modes.size(); ++i)
    CHECK(g1.modes[i].amp == f.modes[i].amp);
}

TEST_CASE("smooth profile fields respect support caps") {
  EquationParams p;
  ModeSet f = smooth_profile_field(8, 2.0, 4, 1.0, true, p, 7);
  CHECK(xsb_norm(f, {0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& m : f.modes) {
    CHECK(std::abs(m.xi) <= 8);
    CHECK(std::abs(m.lambda) <= 4);
  }
}

TEST_CASE("ratio scan emits fixed columns and is reproducible") {
  RatioScanConfig rc;
  rc.kind = EstimateKind::Bilinear;
  rc.s_list = {-1.0};
  rc.n_list = {4, 8};
  rc.n_random = 3;
  rc.n_adversarial = 2;
  rc.seed = 12;
  RatioScanReport r1 = ratio_scaling_scan(rc);
  RatioScanReport r2 = ratio_scaling_scan(rc);
  std::string csv1 = ratio_scan_csv(r1);
  std::string csv2 = ratio_scan_csv(r2);
  CHECK(csv1 == csv2);
  CHECK(csv1.rfind("estimate,s,b,N,regime,seed,ratio\n", 0) == 0);
  CHECK(!r1.rows.empty());
  bool have_random = false, have_adversarial = false;
  for (const auto& row : r1.rows) {
    CHECK(row.ratio >= 0.0);
    if (row.regime == "random") have_random = true;
    if (row.regime == "adversarial") have_adversarial = true;
  }
  CHECK(have_random);
  CHECK(have_adversarial);
  // Slopes for both regimes and the combined fit are reported per s.
  CHECK(r1.slopes.size() == 3);
}

TEST_CASE("linear estimate scan produces sane ratio tables") {
  Grid g = make_grid(64, 2.0 * kPi);
  EquationParams p;
  LinearEstimateReport rep = verify_linear_estimates(
      g, p, 0.0, {0.55, 0.75}, {0.5, 0.25, 0.125}, 3, 4, 1024, 2.0);
  REQUIRE(rep.homogeneous_slopes.size() == 2);
  CHECK(rep.rows.size() == 2 * 3 * 3);
  for (const auto& row : rep.rows) {
    CHECK(row.ratio_homogeneous > 0.0);
    CHECK(row.ratio_duhamel > 0.0);
  }
  // The homogeneous delta-scaling steepens as b grows.
  CHECK(rep.homogeneous_slopes[1] < rep.homogeneous_slopes[0]);
  CHECK(rep.homogeneous_slopes[1] < 0.0);
}
