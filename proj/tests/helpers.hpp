#pragma once

#include <vector>

#include "rhino/array.hpp"
#include "rhino/rng.hpp"

namespace testutil {

inline rhino::DenseArray random_array(rhino::Shape shape, rhino::SeededRng& rng, double lo = -1.0,
                                      double hi = 1.0) {
  return rng.uniform_array(std::move(shape), lo, hi);
}

/// Symmetric matrix with unit diagonal and off-diagonal entries in
/// [-1, 1]; the shape an affinity matrix takes.
inline rhino::DenseArray random_affinity(int64_t n, rhino::SeededRng& rng) {
  rhino::DenseArray a({n, n});
  for (int64_t i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    for (int64_t j = i + 1; j < n; ++j) {
      double v = rng.uniform(-1.0, 1.0);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

}  // namespace testutil
