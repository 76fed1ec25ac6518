#pragma once

#include <complex>
#include <vector>

#include "kawalab/common.hpp"

namespace kawalab {

// Fourth-order cumulative quadrature on a uniform lattice: returns I with
// I[j] = integral from t[center] to t[j] of the cubic interpolant of g.
// Interior steps use the symmetric four-point rule, boundary steps the
// one-sided cubic rule.
template <typename T>
std::vector<T> cumulative_integral(const std::vector<T>& g, double h,
                                   std::size_t center) {
  const std::size_t n = g.size();
  if (n < 4) throw ConfigError("cumulative_integral: need at least 4 samples");
  if (center >= n) throw ConfigError("cumulative_integral: center out of range");

  std::vector<T> step(n - 1);
  step[0] = (h / 24.0) * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]);
  for (std::size_t j = 1; j + 2 < n; ++j)
    step[j] = (h / 24.0) *
              (-g[j - 1] + 13.0 * g[j] + 13.0 * g[j + 1] - g[j + 2]);
  step[n - 2] = (h / 24.0) *
                (g[n - 4] - 5.0 * g[n - 3] + 19.0 * g[n - 2] + 9.0 * g[n - 1]);

  std::vector<T> out(n);
  out[center] = T{};
  for (std::size_t j = center; j + 1 < n; ++j) out[j + 1] = out[j] + step[j];
  for (std::size_t j = center; j > 0; --j) out[j - 1] = out[j] - step[j - 1];
  return out;
}

}  // namespace kawalab
