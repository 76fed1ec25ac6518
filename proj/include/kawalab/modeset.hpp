#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kawalab/common.hpp"
#include "kawalab/dispersion.hpp"
#include "kawalab/spacetime.hpp"

namespace kawalab {

// Sparse space-time Fourier data on the integer lattice: box length 2pi in x
// and window 2pi in t, so both xi and tau are integers. A mode stores the
// modulation offset lambda = tau - p(xi) instead of tau; for integer
// coefficients the offsets stay exact in doubles far beyond the scan range.
// Fields are general complex valued (no conjugate symmetry imposed).
struct SparseMode {
  std::int64_t xi = 0;
  double lambda = 0.0;
  cd amp{0.0, 0.0};
};

struct ModeSet {
  EquationParams params;
  std::vector<SparseMode> modes;  // sorted by (xi, lambda), duplicates merged
};

// Sort by (xi, lambda), merge equal sites, drop exact zeros.
void canonicalize(ModeSet& f);

// Norms carry the lattice measure (box x window = 4 pi^2) so they agree with
// the dense SpaceTimeField convention and ratios match across both paths.
double xsb_norm(const ModeSet& f, const NormSpec& norm);
void normalize_mass(ModeSet& f);  // unit space-time L2; ConfigError on zero

ModeSet convolve(const ModeSet& u, const ModeSet& v);
ModeSet convolve_serial(const ModeSet& u, const ModeSet& v);

// Estimate quotients. All throw ConfigError on a zero denominator.
double bilinear_ratio(const ModeSet& u, const ModeSet& v, const NormSpec& norm);
double trilinear_ratio(const ModeSet& u, const ModeSet& v, const ModeSet& w,
                       const NormSpec& norm);
double asym_bilinear_ratio(const ModeSet& u, const ModeSet& v, double s,
                           double eps);

// Random amplitudes on {sign*xi in [N,2N), |lambda| in [L,2L)}, unit
// space-time L2 norm. N, L dyadic (powers of two >= 1).
ModeSet block_concentrated_field(std::int64_t n_dyad, std::int64_t l_dyad,
                                 int sign, const EquationParams& params,
                                 std::uint64_t seed);

// Random or deterministic field with profile <xi>^-xi_decay <lambda>^-2 on
// |xi| <= bandwidth, |lambda| <= lambda_cap. Sites with |xi| > 8 are kept
// with probability keep_fraction (cost control for triple convolutions).
ModeSet smooth_profile_field(std::int64_t bandwidth, double xi_decay,
                             std::int64_t lambda_cap, double keep_fraction,
                             bool deterministic, const EquationParams& params,
                             std::uint64_t seed);

// Embed into a dense field (time window 2pi so the tau lattice is Z).
// ConfigError if a mode falls off the dense lattice.
SpaceTimeField densify(const ModeSet& f, const Grid& grid, std::size_t n_tau);

enum class EstimateKind { Bilinear, Trilinear, AsymBilinear };

struct RatioRow {
  EstimateKind estimate;
  double s = 0.0;
  double b = 0.0;  // for AsymBilinear this column carries eps
  std::int64_t n_scale = 0;
  std::string regime;  // "random" or "adversarial"
  std::uint64_t seed = 0;
  double ratio = 0.0;
};

struct RatioSlope {
  EstimateKind estimate;
  double s = 0.0;
  std::string regime;  // "all" fits max over both regimes
  double slope = 0.0;
};

struct RatioScanReport {
  std::vector<RatioRow> rows;
  std::vector<RatioSlope> slopes;
  double max_ratio(double s, std::int64_t n, const std::string& regime) const;
};

struct RatioScanConfig {
  EstimateKind kind = EstimateKind::Bilinear;
  std::vector<double> s_list;
  std::vector<std::int64_t> n_list;  // dyadic scales
  double b = 0.6;
  double eps = 0.05;                 // AsymBilinear only
  std::size_t n_random = 100;
  std::size_t n_adversarial = 20;
  EquationParams params;
  std::uint64_t seed = 1;
};

// Ensembles per scale N: "random" members mix decaying-profile fields
// (two deterministic anchors, then seeded ones) with block tuples of dyads
// <= N; "adversarial" members are the coherent same-scale configurations
// (opposite-sign pairs whose product falls on low frequencies, and the
// cancellation-pair triples). Members are shared across the s-grid.
RatioScanReport ratio_scaling_scan(const RatioScanConfig& cfg);

const char* estimate_name(EstimateKind kind);

// Fixed column order "estimate,s,b,N,regime,seed,ratio"; reruns with the same
// config are byte-identical.
std::string ratio_scan_csv(const RatioScanReport& report);

// Fitted log-log slopes per (estimate, s, regime).
std::string ratio_scan_json(const RatioScanReport& report);

}  // namespace kawalab
