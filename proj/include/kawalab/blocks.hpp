#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kawalab/dispersion.hpp"

namespace kawalab {

// Dyadic labels for one frequency-modulation block: annuli |xi_j| in
// [N_j, 2N_j), |lambda_j| in [L_j, 2L_j), and |h(xi)| in [H, 4H). The
// resonance window is twice as wide as the others so thin blocks survive
// discretization; this only loosens constants.
struct DyadicBlockSpec {
  double n1 = 1, n2 = 1, n3 = 1;
  double h = 1;
  double l1 = 1, l2 = 1, l3 = 1;

  std::array<double, 3> n_sorted() const;  // ascending
  std::array<double, 3> l_sorted() const;  // ascending
};

void validate(const DyadicBlockSpec& spec);

enum class BlockRegime { PlusPlusCoherence, PlusMinusCoherence, Other, Vanishing };

std::string regime_name(BlockRegime r);

// Label-level classification. Vanishing when the zero-sum identities make the
// block empty: the two largest frequency labels must agree within a factor 2,
// and the largest modulation label must match max(H, L_med) within a factor 4.
// Otherwise the matching coherence pattern, or Other.
BlockRegime classify_regime(const DyadicBlockSpec& spec);

// Right-hand side of the matching regime's block estimate:
//   (++)   L_min^{1/2} N_max^{-2} L_med^{1/2}
//   (+-)   L_min^{1/2} N_max^{-2} min(H, (N_max/N_min) L_med)^{1/2}
//   other  L_min^{1/2} N_max^{-2} min(H, L_med)^{1/2}
// Throws on a Vanishing spec.
double regime_bound(const DyadicBlockSpec& spec);

// Crude high-modulation bound L_min^{1/2} N_min^{1/2}.
double elementary_upper_bound(const DyadicBlockSpec& spec);

// Finitely supported multiplier on the zero-sum triple set of a product
// lattice. Each slot owns a site table (frequency, modulation) with a uniform
// per-site measure; entries index one site per slot. Holds both discretized
// blocks and explicit small cyclic-group multipliers.
struct DiscreteMultiplier {
  struct Site {
    double xi = 0;
    double lambda = 0;
  };
  struct Entry {
    std::uint32_t slot[3];
    double value = 1.0;
  };
  std::array<std::vector<Site>, 3> sites;
  std::array<double, 3> measure{1.0, 1.0, 1.0};  // per-site weight per slot
  // Quadrature weight per triple: the product of the two enumerated slots'
  // site measures. The third slot is fixed by the zero-sum identities and
  // contributes membership constraints, not measure.
  double entry_weight = 1.0;
  std::vector<Entry> entries;
  std::array<double, 3> dxi{0, 0, 0};
  std::array<double, 3> dlambda{0, 0, 0};

  std::size_t support_cardinality() const { return entries.size(); }
};

// Indicator of the block on per-slot lattices with cells_per_dyad cells per
// dyad and per sign: frequency spacing N_j/c, modulation spacing
// max(1, L_j/c). The slot with the largest modulation label is determined by
// the identities xi1+xi2+xi3 = 0 and lambda1+lambda2+lambda3+h = 0 (h exact;
// annulus tests on exact values; the determined modulation is then snapped to
// its slot lattice for site identity). Empty support is legal and mirrors a
// Vanishing label.
DiscreteMultiplier discretize_block(const DyadicBlockSpec& spec,
                                    const EquationParams& params,
                                    std::size_t cells_per_dyad);

// Constant multiplier on the zero-sum triples of Z_n with counting measure.
DiscreteMultiplier cyclic_constant_multiplier(std::size_t n, double value);

// Partial contraction onto `target`: G[site] = sum over entries hitting that
// site of value * entry_weight * product of the other two slot vectors.
// Parallel accumulation merges per-thread buffers in thread order, so results
// are reproducible for a fixed thread count.
std::vector<double> contract_slot(const DiscreteMultiplier& m, int target,
                                  const std::array<std::vector<double>, 3>& f,
                                  bool parallel);

struct NormEstimate {
  double lower_bound = 0.0;
  std::vector<double> trace;  // objective after each sweep, best restart
  std::size_t restarts = 0;
};

// Alternating maximization of the trilinear form over unit vectors in the
// three slot L^2 spaces: fixing two slots, the optimal third is the
// normalized partial contraction, so the objective never decreases. Reports
// the best value over random restarts; it is a lower bound on the discrete
// multiplier norm.
NormEstimate estimate_multiplier_norm(const DiscreteMultiplier& m,
                                      std::size_t restarts,
                                      std::size_t max_iters, double tol,
                                      std::uint64_t seed);

struct BlockScanRow {
  DyadicBlockSpec spec;
  BlockRegime regime = BlockRegime::Other;
  std::size_t support = 0;
  double estimate = 0;
  double bound = 0;
  double ratio = 0;  // estimate / bound
};

struct BlockScanReport {
  std::vector<BlockScanRow> rows;
  // Per-regime multivariate log-log slopes of the estimate against
  // L_min, L_med, N_max (keys "l_min", "l_med", "n_max"; a key is absent
  // when the scan held that variable fixed).
  std::map<std::string, std::map<std::string, double>> slopes;
  double c_scan = 0;  // max estimate/bound over rows
  double c_disc = 0;  // max estimate/elementary_upper_bound over rows
};

BlockScanReport verify_block_estimates(const std::vector<DyadicBlockSpec>& scan,
                                       const EquationParams& params,
                                       std::size_t cells_per_dyad,
                                       std::size_t restarts,
                                       std::uint64_t seed);

// Standard (++) scan: labels (N, N, 2N) with H = 64 N^5 and L3 = H, sweeping
// L1 over lmin_list (L2 = 256), L2 over lmed_list (L1 = 1), and N over n_list
// (L1 = 1, L2 = 4). The three one-variable sweeps feed one regression.
std::vector<DyadicBlockSpec> plusplus_scan_family(
    const std::vector<double>& n_list, const std::vector<double>& lmin_list,
    const std::vector<double>& lmed_list);

// Standard (+-) scan: labels (1, N, N) with H = 16 N^4, L1 = 2H, L3 = 1,
// sweeping L2 over lmed_list across the min-switch at L2 = H / N.
std::vector<DyadicBlockSpec> plusminus_scan_family(
    double n, const std::vector<double>& lmed_list);

std::string block_report_csv(const BlockScanReport& report);
std::string block_report_json(const BlockScanReport& report);

}  // namespace kawalab
