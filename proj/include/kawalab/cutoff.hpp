#pragma once

#include <cmath>

#include "kawalab/common.hpp"

namespace kawalab {

// Smooth even bump: identically 1 on [-1/2, 1/2], identically 0 outside
// (-1, 1), glued with the standard exp(-1/x) partition pair in between.
inline double bump_psi(double t) {
  const auto g = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  double a = std::abs(t);
  if (a <= 0.5) return 1.0;
  if (a >= 1.0) return 0.0;
  double up = g(2.0 - 2.0 * a);
  return up / (up + g(2.0 * a - 1.0));
}

struct CutoffSpec {
  double delta = 1.0;  // scale: the window is t -> bump_psi(t / delta)
};

inline void validate(const CutoffSpec& c) {
  if (!(c.delta > 0.0)) throw ConfigError("CutoffSpec: delta must be positive");
}

inline double window_value(const CutoffSpec& c, double t) {
  return bump_psi(t / c.delta);
}

}  // namespace kawalab
