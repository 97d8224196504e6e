#pragma once

#include <string>
#include <vector>

#include "rhino/ops.hpp"
#include "rhino/tape.hpp"

namespace rhino {

struct DgcnConfig {
  int64_t cheb_order = 2;  // K
  int64_t layers = 2;
  int64_t hidden = 64;

  void validate() const {
    if (cheb_order < 1) throw ConfigError("dgcn cheb_order must be >= 1");
    if (hidden <= 0) throw ConfigError("dgcn hidden must be positive");
    if (layers < 1) throw ConfigError("dgcn layers must be >= 1");
  }
};

namespace detail {

inline DenseArray row_normalized(const DenseArray& a) {
  const int64_t n = a.dim(0);
  DenseArray out = a;
  for (int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int64_t j = 0; j < n; ++j) s += a(i, j);
    if (s == 0.0) throw ParameterError("normalization error: adjacency row " + std::to_string(i) + " sums to zero");
    for (int64_t j = 0; j < n; ++j) out(i, j) /= s;
  }
  return out;
}

/// T_1..T_K with T_0 = I, T_1 = X, T_k = 2 X T_{k-1} - T_{k-2}.
inline std::vector<DenseArray> chebyshev_terms(const DenseArray& x, int64_t order) {
  std::vector<DenseArray> terms;
  DenseArray t_prev = DenseArray::identity(x.dim(0));
  DenseArray t_cur = x;
  terms.push_back(t_cur);
  for (int64_t k = 2; k <= order; ++k) {
    DenseArray t_next = arr_sub(arr_scale(arr_matmul(x, t_cur), 2.0), t_prev);
    t_prev = t_cur;
    t_cur = t_next;
    terms.push_back(t_cur);
  }
  return terms;
}

}  // namespace detail

/// Diffusion convolution over forward (A row-normalized) and backward
/// (A^T row-normalized) transition matrices with Chebyshev expansion:
/// out = sum_k T_k(Af) h Theta_f^k + T_k(Ab) h Theta_b^k.
inline Var dgcn_layer(Tape& tape, ParameterStore& store, const std::string& prefix, Var h,
                      const DenseArray& adjacency, const DgcnConfig& cfg, int64_t out_width) {
  cfg.validate();
  const int64_t n = h.val().dim(0);
  const int64_t in_width = h.val().dim(1);
  if (adjacency.ndim() != 2 || adjacency.dim(0) != n || adjacency.dim(1) != n)
    throw DimensionError(prefix + ": adjacency must be " + std::to_string(n) + " square");

  DenseArray fwd = detail::row_normalized(adjacency);
  DenseArray bwd = detail::row_normalized(arr_transpose(adjacency));
  auto t_fwd = detail::chebyshev_terms(fwd, cfg.cheb_order);
  auto t_bwd = detail::chebyshev_terms(bwd, cfg.cheb_order);

  Var out{};
  for (int64_t k = 1; k <= cfg.cheb_order; ++k) {
    auto theta = [&](const char* dir) {
      std::string name = prefix + "." + dir + std::to_string(k);
      store.get_or_init(name, {in_width, out_width}, in_width, out_width);
      return tape.param(store, name);
    };
    Var term_f = matmul(matmul(tape.constant(t_fwd[static_cast<size_t>(k - 1)]), h), theta("theta_f"));
    Var term_b = matmul(matmul(tape.constant(t_bwd[static_cast<size_t>(k - 1)]), h), theta("theta_b"));
    Var term = add(term_f, term_b);
    out = out.valid() ? add(out, term) : term;
  }
  return out;
}

/// Stacked DGCN layers, relu between layers, linear last layer.
inline Var dgcn_stack(Tape& tape, ParameterStore& store, const std::string& prefix, Var h,
                      const DenseArray& adjacency, const DgcnConfig& cfg) {
  Var cur = h;
  for (int64_t l = 0; l < cfg.layers; ++l) {
    cur = dgcn_layer(tape, store, prefix + ".l" + std::to_string(l), cur, adjacency, cfg, cfg.hidden);
    if (l + 1 < cfg.layers) cur = relu(cur);
  }
  return cur;
}

}  // namespace rhino
