#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rhino/array.hpp"

namespace rhino {

/// Deterministic random source. All distributions are implemented on top
/// of the raw mt19937_64 stream so that identical seeds give identical
/// sample sequences regardless of the standard library in use.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : seed_(seed), gen_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    u1 = std::max(u1, 1e-300);
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Standard Gumbel(0, 1): -log(-log(U)).
  double gumbel() {
    double u = std::clamp(uniform(), 1e-300, 1.0 - 1e-16);
    return -std::log(-std::log(u));
  }

  DenseArray uniform_array(Shape shape, double lo, double hi) {
    DenseArray a(std::move(shape));
    for (int64_t i = 0; i < a.numel(); ++i) a[i] = uniform(lo, hi);
    return a;
  }

  DenseArray normal_array(Shape shape) {
    DenseArray a(std::move(shape));
    for (int64_t i = 0; i < a.numel(); ++i) a[i] = normal();
    return a;
  }

  DenseArray gumbel_array(Shape shape) {
    DenseArray a(std::move(shape));
    for (int64_t i = 0; i < a.numel(); ++i) a[i] = gumbel();
    return a;
  }

  /// Fisher-Yates shuffle driven by the raw stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_u64() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rhino
