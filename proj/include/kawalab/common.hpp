#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace kawalab {

// Configuration / argument problems. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Runtime numerical failures (blow-up, divergence, singular operators).
// The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// 64-bit FNV-1a. Used both for artifact checksums and for deriving RNG keys.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

// Counter-based deterministic generator. Each draw is a pure function of
// (key, counter), so streams keyed per (scenario, block, replicate) are
// reproducible regardless of evaluation order, and enlarging a sample set
// keeps all previously drawn values.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = fnv1a64(&seed, sizeof seed);
    for (auto t : tags) h = fnv1a64(&t, sizeof t, h);
    key_ = h;
  }

  // splitmix64 finalizer applied to key ^ counter stepping.
  std::uint64_t next_u64() {
    std::uint64_t z = key_ + 0x9e3779b97f4a7c15ull * (++counter_);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double gauss() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  int sign() { return (next_u64() & 1) ? 1 : -1; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Least-squares slope of y against x. Used throughout for log-log fits.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("fit_slope: need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  if (den == 0.0) throw ConfigError("fit_slope: degenerate abscissae");
  return num / den;
}

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0 || y[i] <= 0)
      throw NumericalError("loglog_slope: nonpositive sample");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_slope(lx, ly);
}

}  // namespace kawalab
