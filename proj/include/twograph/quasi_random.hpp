#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace twograph {

/// Single seeded engine; every stochastic step in a run draws from one of these.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

  /// Uniform in [0, 1) built from the top 53 bits, so results do not depend on
  /// the standard library's distribution implementations.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    while (u <= 0.0) u = uniform();
    const double v = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u));
    spare_ = rad * std::sin(6.283185307179586 * v);
    has_spare_ = true;
    return rad * std::cos(6.283185307179586 * v);
  }

  std::uint64_t next() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline constexpr int kHaltonPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                                        37, 41, 43, 47, 53, 59, 61, 67, 71, 73};

inline double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

/// Halton points in [0,1)^dim with a Cranley-Patterson rotation drawn from `rng`.
class ShiftedHalton {
 public:
  ShiftedHalton(int dim, Rng& rng) : dim_(dim), shift_(dim) {
    for (auto& s : shift_) s = rng.uniform();
  }

  void point(std::uint64_t i, double* out) const {
    for (int d = 0; d < dim_; ++d) {
      double v = radical_inverse(i + 1, kHaltonPrimes[d]) + shift_[d];
      out[d] = v - std::floor(v);
    }
  }

  int dim() const { return dim_; }

 private:
  int dim_;
  std::vector<double> shift_;
};

}  // namespace twograph
