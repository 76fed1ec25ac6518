#include "kawalab/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace kawalab {

namespace {

// Plan cache keyed by (size, direction). FFTW's planner is not thread safe,
// so creation is serialized; executing a cached plan on per-call buffers via
// fftw_execute_dft is safe concurrently.
class Transformer {
 public:
  static Transformer& instance() {
    static Transformer t;
    return t;
  }

  void run(std::vector<cd>& inout, int direction) {
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto key = std::make_pair(inout.size(), direction);
      auto it = plans_.find(key);
      if (it == plans_.end()) {
        std::vector<cd> probe(inout.size());
        plan = fftw_plan_dft_1d(
            static_cast<int>(inout.size()),
            reinterpret_cast<fftw_complex*>(probe.data()),
            reinterpret_cast<fftw_complex*>(probe.data()), direction,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
      } else {
        plan = it->second;
      }
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(inout.data()),
                     reinterpret_cast<fftw_complex*>(inout.data()));
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid make_grid(std::size_t n, double box_length) {
  if (!is_pow2(n) || n < 8)
    throw ConfigError("make_grid: n must be a power of two >= 8");
  if (!(box_length > 0.0))
    throw ConfigError("make_grid: box_length must be positive");
  return Grid{n, box_length};
}

SpectralField zero_field(const Grid& g) {
  return SpectralField{g, std::vector<cd>(g.n, cd{0.0, 0.0})};
}

void fft_inplace(std::vector<cd>& data, bool forward) {
  if (data.empty()) throw ConfigError("fft_inplace: empty buffer");
  Transformer::instance().run(data, forward ? FFTW_FORWARD : FFTW_BACKWARD);
}

SpectralField to_spectral(const RealField& u) {
  if (u.values.size() != u.grid.n)
    throw ConfigError("to_spectral: value count does not match grid");
  std::vector<cd> buf(u.grid.n);
  for (std::size_t j = 0; j < u.grid.n; ++j) buf[j] = cd{u.values[j], 0.0};
  Transformer::instance().run(buf, FFTW_FORWARD);
  const double inv_n = 1.0 / static_cast<double>(u.grid.n);
  for (auto& c : buf) c *= inv_n;
  return SpectralField{u.grid, std::move(buf)};
}

RealField to_physical(const SpectralField& u) {
  if (u.coeff.size() != u.grid.n)
    throw ConfigError("to_physical: coefficient count does not match grid");
  std::vector<cd> buf = u.coeff;
  Transformer::instance().run(buf, FFTW_BACKWARD);
  RealField out{u.grid, std::vector<double>(u.grid.n)};
  for (std::size_t j = 0; j < u.grid.n; ++j) out.values[j] = buf[j].real();
  return out;
}

double hs_norm(const SpectralField& u, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.grid.n; ++i) {
    double w = 1.0 + std::abs(u.grid.frequency(i));
    acc += std::pow(w, 2.0 * s) * std::norm(u.coeff[i]);
  }
  return std::sqrt(u.grid.box_length * acc);
}

std::size_t quadratic_cutoff(std::size_t n) { return n / 3; }
std::size_t cubic_cutoff(std::size_t n) { return n / 4 - 1; }

SpectralField dealiased_product(const SpectralField& a, const SpectralField& b,
                                const SpectralField* c) {
  if (!(a.grid == b.grid) || (c && !(a.grid == c->grid)))
    throw ConfigError("dealiased_product: grids do not match");
  const std::size_t n = a.grid.n;
  const std::size_t m = 2 * n;
  const auto embed = [&](const SpectralField& f) {
    std::vector<cd> big(m, cd{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
      int k = f.grid.wavenumber(i);
      std::size_t j = k >= 0 ? static_cast<std::size_t>(k)
                             : static_cast<std::size_t>(k + static_cast<int>(m));
      big[j] = f.coeff[i];
    }
    Transformer::instance().run(big, FFTW_BACKWARD);
    return big;
  };

  std::vector<cd> pa = embed(a);
  std::vector<cd> pb = embed(b);
  for (std::size_t j = 0; j < m; ++j) pa[j] *= pb[j];
  if (c) {
    std::vector<cd> pc = embed(*c);
    for (std::size_t j = 0; j < m; ++j) pa[j] *= pc[j];
  }
  Transformer::instance().run(pa, FFTW_FORWARD);
  const double inv_m = 1.0 / static_cast<double>(m);

  const std::size_t kc = c ? cubic_cutoff(n) : quadratic_cutoff(n);
  SpectralField out = zero_field(a.grid);
  for (int k = -static_cast<int>(kc); k <= static_cast<int>(kc); ++k) {
    std::size_t j = k >= 0 ? static_cast<std::size_t>(k)
                           : static_cast<std::size_t>(k + static_cast<int>(m));
    out.at_wavenumber(k) = pa[j] * inv_m;
  }
  return out;
}

}  // namespace kawalab
