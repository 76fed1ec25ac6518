#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "kawalab/blocks.hpp"
#include "oracles.hpp"

using namespace kawalab;

namespace {

DyadicBlockSpec spec_of(double n1, double n2, double n3, double h, double l1,
                        double l2, double l3) {
  DyadicBlockSpec s;
  s.n1 = n1;
  s.n2 = n2;
  s.n3 = n3;
  s.h = h;
  s.l1 = l1;
  s.l2 = l2;
  s.l3 = l3;
  return s;
}

// Zero-sum triples of Z_n with seeded random entry values.
DiscreteMultiplier zn_random_multiplier(std::size_t n, std::uint64_t seed,
                                        bool positive) {
  DiscreteMultiplier m = cyclic_constant_multiplier(n, 1.0);
  Rng rng(seed, {0x2e11ull, n});
  for (auto& e : m.entries)
    e.value = positive ? rng.uniform(0.25, 1.0) : rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("spec validation accepts dyadic labels and rejects the rest") {
  CHECK_NOTHROW(validate(spec_of(1, 2, 1024, 4, 1, 8, 64)));
  CHECK_THROWS_AS(validate(spec_of(3, 2, 4, 4, 1, 1, 1)), ConfigError);
  CHECK_THROWS_AS(validate(spec_of(1, 2, 4, 3, 1, 1, 1)), ConfigError);
  CHECK_THROWS_AS(validate(spec_of(1, 2, 4, 4, 0.5, 1, 1)), ConfigError);
  // Frequency labels below 1 are legal dyadics.
  CHECK_NOTHROW(validate(spec_of(0.25, 4, 4, 4, 1, 1, 1)));
}

TEST_CASE("regime classification on label patterns") {
  CHECK(classify_regime(spec_of(4, 4, 4, 1024, 1, 4, 1024)) ==
        BlockRegime::PlusPlusCoherence);
  CHECK(classify_regime(spec_of(1, 8, 8, 4096, 4096, 4, 1)) ==
        BlockRegime::PlusMinusCoherence);
  CHECK(classify_regime(spec_of(4, 4, 4, 16, 1, 64, 128)) ==
        BlockRegime::Other);
  // Frequency zero-sum failure: the two largest labels separate.
  CHECK(classify_regime(spec_of(1, 2, 8, 64, 1, 1, 64)) ==
        BlockRegime::Vanishing);
  // Modulation identity failure: largest modulation far above max(H, L_med).
  CHECK(classify_regime(spec_of(4, 4, 4, 1, 1, 1, 1024)) ==
        BlockRegime::Vanishing);
}

TEST_CASE("regime bounds reproduce hand-computed values") {
  // (++): sqrt(L_min) N_max^-2 sqrt(L_med) = 1 * 1/64 * 2.
  DyadicBlockSpec pp = spec_of(8, 8, 8, 32768, 1, 4, 32768);
  REQUIRE(classify_regime(pp) == BlockRegime::PlusPlusCoherence);
  CHECK(regime_bound(pp) == doctest::Approx(0.03125).epsilon(1e-14));

  // Other: 1 * 1/16 * sqrt(min(16, 64)) = 4/16.
  DyadicBlockSpec other = spec_of(4, 4, 4, 16, 1, 64, 128);
  REQUIRE(classify_regime(other) == BlockRegime::Other);
  CHECK(regime_bound(other) == doctest::Approx(0.25).epsilon(1e-14));

  // (+-): 1 * 1/64 * sqrt(min(1024, (8/1)*2)) = 4/64.
  DyadicBlockSpec pm = spec_of(1, 8, 8, 1024, 1024, 2, 1);
  REQUIRE(classify_regime(pm) == BlockRegime::PlusMinusCoherence);
  CHECK(regime_bound(pm) == doctest::Approx(0.0625).epsilon(1e-14));

  CHECK_THROWS_AS(regime_bound(spec_of(1, 2, 8, 64, 1, 1, 64)), ConfigError);
}

TEST_CASE("elementary bound is sqrt(L_min N_min) and skips validation") {
  CHECK(elementary_upper_bound(DyadicBlockSpec{}) == 1.0);
  DyadicBlockSpec s;
  s.n1 = s.n2 = s.n3 = 9;  // non-dyadic on purpose
  s.l1 = s.l2 = s.l3 = 4;
  CHECK(elementary_upper_bound(s) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("contract_slot sums value weight and the other two slots") {
  DiscreteMultiplier m;
  for (int j = 0; j < 3; ++j)
    m.sites[j] = {{0.0, 0.0}, {1.0, 0.0}};
  m.entries.push_back({{0, 0, 0}, 2.0});
  m.entries.push_back({{1, 1, 0}, 3.0});
  std::array<std::vector<double>, 3> f = {
      std::vector<double>{1.0, 2.0}, std::vector<double>{3.0, 4.0},
      std::vector<double>{5.0, 6.0}};
  std::vector<double> g2 = contract_slot(m, 2, f, false);
  CHECK(g2[0] == 2.0 * 1.0 * 3.0 + 3.0 * 2.0 * 4.0);
  CHECK(g2[1] == 0.0);
  std::vector<double> g0 = contract_slot(m, 0, f, false);
  CHECK(g0[0] == 2.0 * 3.0 * 5.0);
  CHECK(g0[1] == 3.0 * 4.0 * 5.0);
  CHECK_THROWS_AS(contract_slot(m, 3, f, false), ConfigError);
}

TEST_CASE("constant cyclic multiplier has norm sqrt(n)") {
  CHECK_THROWS_AS(cyclic_constant_multiplier(0, 1.0), ConfigError);
  DiscreteMultiplier m = cyclic_constant_multiplier(8, 1.0);
  CHECK(m.support_cardinality() == 64);
  NormEstimate est = estimate_multiplier_norm(m, 8, 200, 1e-12, 11);
  CHECK(est.lower_bound ==
        doctest::Approx(std::sqrt(8.0)).epsilon(0.01));
}

TEST_CASE("alternating maximization matches an independent maximizer on Z_n") {
  for (std::size_t n : {4, 5, 7, 8}) {
    DiscreteMultiplier m = zn_random_multiplier(n, 40 + n, n % 2 == 0);
    double est = estimate_multiplier_norm(m, 16, 300, 1e-12, 3).lower_bound;
    double orc = oracles::multiplier_norm(m, 24, 600, 9);
    CAPTURE(n);
    CHECK(std::abs(est - orc) < 0.01 * std::max(est, orc));
  }
}

TEST_CASE("estimate is absolutely homogeneous in the entry values") {
  DiscreteMultiplier m = zn_random_multiplier(6, 71, false);
  double base = estimate_multiplier_norm(m, 6, 200, 1e-12, 5).lower_bound;
  DiscreteMultiplier m4 = m;
  for (auto& e : m4.entries) e.value *= 4.0;  // exact scaling
  CHECK(estimate_multiplier_norm(m4, 6, 200, 1e-12, 5).lower_bound ==
        doctest::Approx(4.0 * base).epsilon(1e-12));
  DiscreteMultiplier mn = m;
  for (auto& e : mn.entries) e.value *= -0.37;
  CHECK(estimate_multiplier_norm(mn, 6, 200, 1e-12, 5).lower_bound ==
        doctest::Approx(0.37 * base).epsilon(1e-11));
}

TEST_CASE("single-entry norm is the weight over the root cell measures") {
  DiscreteMultiplier m;
  for (int j = 0; j < 3; ++j) m.sites[j] = {{0.0, 0.0}};
  m.measure = {0.5, 2.0, 4.0};
  // Weight convention of discretize_block: slots 1 and 2 enumerated, slot 0
  // determined.  Unit-mass inputs are 1/sqrt(measure) at their single site,
  // so the form value is weight / sqrt(m0 m1 m2).
  m.entry_weight = 2.0 * 4.0;
  m.entries.push_back({{0, 0, 0}, -3.0});
  NormEstimate est = estimate_multiplier_norm(m, 2, 8, 1e-14, 2);
  CHECK(est.lower_bound ==
        doctest::Approx(3.0 * 8.0 / std::sqrt(0.5 * 2.0 * 4.0))
            .epsilon(1e-12));
}

TEST_CASE("product multipliers factor and converge in one sweep") {
  std::vector<double> g1 = {1.0, 2.0, 2.0};   // norm 3
  std::vector<double> g2 = {1.0, 1.0, 1.0, 1.0};  // norm 2
  std::vector<double> g3 = {3.0, 4.0};        // norm 5
  DiscreteMultiplier m;
  for (std::size_t a = 0; a < g1.size(); ++a)
    m.sites[0].push_back({static_cast<double>(a), 0.0});
  for (std::size_t b = 0; b < g2.size(); ++b)
    m.sites[1].push_back({static_cast<double>(b), 0.0});
  for (std::size_t c = 0; c < g3.size(); ++c)
    m.sites[2].push_back({static_cast<double>(c), 0.0});
  for (std::size_t a = 0; a < g1.size(); ++a)
    for (std::size_t b = 0; b < g2.size(); ++b)
      for (std::size_t c = 0; c < g3.size(); ++c)
        m.entries.push_back({{static_cast<std::uint32_t>(a),
                              static_cast<std::uint32_t>(b),
                              static_cast<std::uint32_t>(c)},
                             g1[a] * g2[b] * g3[c]});
  NormEstimate est = estimate_multiplier_norm(m, 1, 10, 1e-14, 17);
  CHECK(est.lower_bound == doctest::Approx(30.0).epsilon(1e-10));
  REQUIRE(!est.trace.empty());
  CHECK(est.trace.front() == doctest::Approx(30.0).epsilon(1e-10));
}

TEST_CASE("zeroing entries cannot raise a nonnegative multiplier norm") {
  DiscreteMultiplier full = cyclic_constant_multiplier(6, 1.0);
  DiscreteMultiplier sub = full;
  for (std::size_t k = 0; k < sub.entries.size(); ++k)
    if (k % 3 == 0) sub.entries[k].value = 0.0;
  double nf = estimate_multiplier_norm(full, 8, 200, 1e-12, 21).lower_bound;
  double ns = estimate_multiplier_norm(sub, 8, 200, 1e-12, 22).lower_bound;
  CHECK(ns <= nf + 1e-6);
  CHECK(ns > 0.0);
}

TEST_CASE("trace of the best restart never decreases") {
  DiscreteMultiplier m = zn_random_multiplier(7, 99, false);
  NormEstimate est = estimate_multiplier_norm(m, 4, 60, 1e-14, 31);
  REQUIRE(est.trace.size() >= 2);
  for (std::size_t k = 0; k + 1 < est.trace.size(); ++k)
    CHECK(est.trace[k + 1] >= est.trace[k] * (1.0 - 1e-12));
  CHECK(est.lower_bound == est.trace.back());
  CHECK(est.restarts == 4);
  CHECK_THROWS_AS(estimate_multiplier_norm(m, 0, 10, 1e-9, 1), ConfigError);
  DiscreteMultiplier empty;
  CHECK_THROWS_AS(estimate_multiplier_norm(empty, 2, 10, 1e-9, 1),
                  ConfigError);
}

TEST_CASE("block discretization enforces the zero-sum identities") {
  EquationParams p;
  DyadicBlockSpec s = spec_of(1, 8, 8, 65536, 65536, 2, 1);
  DiscreteMultiplier m = discretize_block(s, p, 8);
  REQUIRE(m.support_cardinality() > 0);
  const double nlab[3] = {s.n1, s.n2, s.n3};
  const double llab[3] = {s.l1, s.l2, s.l3};
  double dmax = std::max({m.dlambda[0], m.dlambda[1], m.dlambda[2]});
  for (const auto& e : m.entries) {
    const auto& s1 = m.sites[0][e.slot[0]];
    const auto& s2 = m.sites[1][e.slot[1]];
    const auto& s3 = m.sites[2][e.slot[2]];
    CHECK(s1.xi + s2.xi + s3.xi == 0.0);
    const DiscreteMultiplier::Site* st[3] = {&s1, &s2, &s3};
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(st[j]->xi) >= nlab[j]);
      CHECK(std::abs(st[j]->xi) < 2.0 * nlab[j]);
      CHECK(std::abs(st[j]->lambda) >= llab[j] - 0.5 * m.dlambda[j] - 1e-9);
      CHECK(std::abs(st[j]->lambda) <=
            2.0 * llab[j] + 0.5 * m.dlambda[j] + 1e-9);
    }
    double hv = resonance_h(s1.xi, s2.xi, p);
    CHECK(std::abs(hv) >= s.h);
    CHECK(std::abs(hv) < 4.0 * s.h);
    CHECK(std::abs(s1.lambda + s2.lambda + s3.lambda + hv) <=
          0.5 * dmax + 1e-9);
  }
}

TEST_CASE("discretization basics: spacing, weight, guards") {
  EquationParams p;
  DyadicBlockSpec s = spec_of(4, 4, 8, 65536, 1, 256, 65536);
  DiscreteMultiplier m = discretize_block(s, p, 8);
  CHECK(m.dxi[0] == 0.5);
  CHECK(m.dxi[2] == 1.0);
  CHECK(m.dlambda[0] == 1.0);      // floored lattice
  CHECK(m.dlambda[1] == 32.0);     // 256 / 8
  CHECK(m.dlambda[2] == 8192.0);   // 65536 / 8
  for (int j = 0; j < 3; ++j)
    CHECK(m.measure[j] == m.dxi[j] * m.dlambda[j]);
  // l3 = h is the largest modulation label, so slot 2 is determined and the
  // entry weight is the cell measure of the two enumerated slots.
  CHECK(m.entry_weight ==
        doctest::Approx(m.measure[0] * m.measure[1]).epsilon(1e-14));
  CHECK_THROWS_AS(discretize_block(s, p, 3), ConfigError);

  // A label pattern whose frequency annuli cannot sum to zero is empty.
  DiscreteMultiplier none =
      discretize_block(spec_of(1, 2, 8, 64, 1, 1, 64), p, 8);
  CHECK(none.support_cardinality() == 0);
}

TEST_CASE("support grows like the cube of the resolution") {
  EquationParams p;
  // One floored modulation lattice, one resolved, plus the determined slot:
  // entries scale as c^2 from the frequencies times c from the resolved
  // modulation.
  DyadicBlockSpec s = spec_of(4, 4, 8, 65536, 1, 256, 65536);
  double c8 = static_cast<double>(discretize_block(s, p, 8).support_cardinality());
  double c16 =
      static_cast<double>(discretize_block(s, p, 16).support_cardinality());
  REQUIRE(c8 > 0);
  double ratio = c16 / c8;
  CHECK(ratio > 5.0);
  CHECK(ratio < 11.0);
}

TEST_CASE("slot-permuted specs discretize to the same support and norm") {
  EquationParams p;
  DyadicBlockSpec s = spec_of(1, 8, 8, 65536, 65536, 2, 1);
  DyadicBlockSpec t = spec_of(8, 8, 1, 65536, 2, 1, 65536);
  DiscreteMultiplier ms = discretize_block(s, p, 8);
  DiscreteMultiplier mt = discretize_block(t, p, 8);
  REQUIRE(ms.support_cardinality() > 0);
  CHECK(ms.support_cardinality() == mt.support_cardinality());
  double es = estimate_multiplier_norm(ms, 6, 60, 1e-9, 7).lower_bound;
  double et = estimate_multiplier_norm(mt, 6, 60, 1e-9, 7).lower_bound;
  CHECK(std::abs(es - et) < 0.02 * std::max(es, et));
}

TEST_CASE("scan families produce the advertised label patterns") {
  std::vector<DyadicBlockSpec> pp =
      plusplus_scan_family({4.0}, {1.0, 16.0}, {4.0});
  REQUIRE(pp.size() == 4);
  for (const auto& s : pp) {
    CHECK(classify_regime(s) == BlockRegime::PlusPlusCoherence);
    CHECK(s.n3 == 2.0 * s.n1);
    CHECK(s.h == 64.0 * std::pow(s.n1, 5.0));
    CHECK(s.l3 == s.h);
  }
  CHECK(pp[0].l1 == 1.0);
  CHECK(pp[1].l1 == 16.0);
  CHECK_THROWS_AS(plusplus_scan_family({}, {1.0}, {1.0}), ConfigError);

  std::vector<DyadicBlockSpec> pm = plusminus_scan_family(8.0, {2.0, 8.0});
  REQUIRE(pm.size() == 2);
  for (const auto& s : pm) {
    CHECK(classify_regime(s) == BlockRegime::PlusMinusCoherence);
    CHECK(s.h == 16.0 * std::pow(s.n2, 4.0));
    CHECK(s.l1 == 2.0 * s.h);
    CHECK(s.l3 == 1.0);
  }
}

TEST_CASE("scan report carries rows, constants, and parseable artifacts") {
  EquationParams p;
  std::vector<DyadicBlockSpec> scan = plusminus_scan_family(4.0, {4.0, 16.0});
  BlockScanReport rep = verify_block_estimates(scan, p, 8, 4, 19);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& row : rep.rows) {
    CHECK(row.regime == BlockRegime::PlusMinusCoherence);
    CHECK(row.support > 0);
    CHECK(row.estimate > 0.0);
    CHECK(row.bound > 0.0);
    CHECK(row.ratio == doctest::Approx(row.estimate / row.bound));
  }
  CHECK(rep.c_scan > 0.0);
  CHECK(rep.c_disc > 0.0);

  std::string csv = block_report_csv(rep);
  CHECK(csv.rfind("n1,n2,n3,h,l1,l2,l3,regime,estimate,bound,ratio\n", 0) ==
        0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  std::string json = block_report_json(rep);
  CHECK(json.find("\"c_scan\"") != std::string::npos);
  CHECK(json.find("\"slopes\"") != std::string::npos);
}
