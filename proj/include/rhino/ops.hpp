#pragma once

#include <string>
#include <vector>

#include "rhino/rng.hpp"
#include "rhino/tape.hpp"

namespace rhino {

enum class Activation { Relu, Tanh, Identity };

inline Var apply_activation(Var x, Activation act) {
  switch (act) {
    case Activation::Relu: return relu(x);
    case Activation::Tanh: return tanh(x);
    case Activation::Identity: return x;
  }
  return x;
}

/// Fully connected stack. layer_sizes = [in, h1, ..., out]; the
/// activation is applied after every layer but the last. Weights live in
/// `store` under `<prefix>.w<i>` / `<prefix>.b<i>` and are created on
/// first use (uniform Xavier weights, zero biases).
inline Var mlp_forward(Tape& tape, ParameterStore& store, const std::string& prefix, Var input,
                       const std::vector<int64_t>& layer_sizes, Activation act = Activation::Relu) {
  if (layer_sizes.size() < 2) throw DimensionError(prefix + ": mlp needs at least [in, out] sizes");
  const Shape in_shape = input.shape();
  if (in_shape.empty() || in_shape.back() != layer_sizes[0])
    throw DimensionError(prefix + ".w0: input last dimension " +
                         std::to_string(in_shape.empty() ? 0 : in_shape.back()) + " != layer size " +
                         std::to_string(layer_sizes[0]));

  int64_t rows = input.numel() / layer_sizes[0];
  Var h = input.val().ndim() == 2 ? input : reshape(input, {rows, layer_sizes[0]});
  for (size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    const std::string wname = prefix + ".w" + std::to_string(i);
    const std::string bname = prefix + ".b" + std::to_string(i);
    store.get_or_init(wname, {layer_sizes[i], layer_sizes[i + 1]}, layer_sizes[i], layer_sizes[i + 1]);
    store.get_or_init_zeros(bname, {layer_sizes[i + 1]});
    Var w = tape.param(store, wname);
    Var b = tape.param(store, bname);
    h = add(matmul(h, w), b);
    if (i + 2 < layer_sizes.size()) h = apply_activation(h, act);
  }
  if (in_shape.size() != 2) {
    Shape out_shape = in_shape;
    out_shape.back() = layer_sizes.back();
    h = reshape(h, out_shape);
  }
  return h;
}

/// One GRU step: update/reset gates and candidate state, with the reset
/// gate applied to the recurrent branch of the candidate.
inline Var gru_cell(Tape& tape, ParameterStore& store, const std::string& prefix, Var x, Var h,
                    int64_t in_size, int64_t hidden_size) {
  auto weight = [&](const char* name, int64_t r, int64_t c) {
    store.get_or_init(prefix + name, {r, c}, r, c);
    return tape.param(store, prefix + name);
  };
  auto bias = [&](const char* name, int64_t n) {
    store.get_or_init_zeros(prefix + name, {n});
    return tape.param(store, prefix + name);
  };
  Var z = sigmoid(add(add(matmul(x, weight(".wz", in_size, hidden_size)),
                          matmul(h, weight(".uz", hidden_size, hidden_size))),
                      bias(".bz", hidden_size)));
  Var r = sigmoid(add(add(matmul(x, weight(".wr", in_size, hidden_size)),
                          matmul(h, weight(".ur", hidden_size, hidden_size))),
                      bias(".br", hidden_size)));
  Var n = tanh(add(add(matmul(x, weight(".wn", in_size, hidden_size)),
                       matmul(mul(r, h), weight(".un", hidden_size, hidden_size))),
                   bias(".bn", hidden_size)));
  return add(mul(affine(z, -1.0, 1.0), n), mul(z, h));
}

/// Unrolls a GRU over a [time x batch x in] sequence from a zero initial
/// state; returns all hidden states as [time x batch x hidden].
inline Var gru_forward(Tape& tape, ParameterStore& store, const std::string& prefix, Var sequence,
                       int64_t hidden_size) {
  const DenseArray& seq = sequence.val();
  if (seq.ndim() != 3)
    throw DimensionError(prefix + ": gru expects [time x batch x in], got " + shape_str(seq.shape()));
  const int64_t steps = seq.dim(0);
  const int64_t batch = seq.dim(1);
  const int64_t in_size = seq.dim(2);

  Var h = tape.constant(DenseArray::zeros({batch, hidden_size}));
  std::vector<Var> outputs;
  outputs.reserve(static_cast<size_t>(steps));
  for (int64_t t = 0; t < steps; ++t) {
    Var x = reshape(slice(sequence, 0, t, 1), {batch, in_size});
    h = gru_cell(tape, store, prefix, x, h, in_size, hidden_size);
    outputs.push_back(reshape(h, {1, batch, hidden_size}));
  }
  return concat(outputs, 0);
}

/// Gumbel-softmax with explicit noise, for reproducible or frozen use.
/// Scores are unnormalized: log-probabilities are recovered with an
/// internal log-softmax before the perturbation.
inline Var gumbel_softmax_with_noise(Var logits, double tau, Var noise) {
  if (tau <= 0.0) throw ParameterError("gumbel-softmax temperature must be positive, got " + std::to_string(tau));
  if (!logits.val().same_shape(noise.val()))
    throw DimensionError("gumbel-softmax noise shape " + shape_str(noise.shape()) + " != logits shape " +
                         shape_str(logits.shape()));
  return softmax(scale(add(log_softmax(logits, -1), noise), 1.0 / tau), -1);
}

/// Draws fresh Gumbel noise from `rng`; the noise enters the graph as a
/// constant so gradients treat it as frozen.
inline Var gumbel_softmax_sample(Var logits, double tau, SeededRng& rng) {
  if (tau <= 0.0) throw ParameterError("gumbel-softmax temperature must be positive, got " + std::to_string(tau));
  Var noise = logits.tape->constant(rng.gumbel_array(logits.shape()));
  return gumbel_softmax_with_noise(logits, tau, noise);
}

/// KL( N(mu_q, diag(sigma_q^2)) || N(mu_p, diag(sigma_p^2)) ), summed
/// over all coordinates.
inline Var kl_diag_gaussians(Var mu_q, Var sigma_q, Var mu_p, Var sigma_p) {
  const DenseArray& sq = sigma_q.val();
  const DenseArray& sp = sigma_p.val();
  if (!mu_q.val().same_shape(sq) || !sq.same_shape(mu_p.val()) || !sq.same_shape(sp))
    throw DimensionError("kl_diag_gaussians: all four arrays must share a shape");
  for (int64_t i = 0; i < sq.numel(); ++i)
    if (sq[i] <= 0.0 || sp[i] <= 0.0) throw ParameterError("kl_diag_gaussians: sigmas must be positive");
  Var ratio = sub(log(sigma_p), log(sigma_q));
  Var num = add(square(sigma_q), square(sub(mu_q, mu_p)));
  Var den = scale(square(sigma_p), 2.0);
  Var per_coord = add(ratio, div(num, den));
  return affine(sum(per_coord), 1.0, -0.5 * static_cast<double>(sq.numel()));
}

/// sum((a-b)^2) / denom; the caller picks the averaging convention.
inline Var mse_over(Var a, Var b, double denom) {
  return scale(sum(square(sub(a, b))), 1.0 / denom);
}

/// The member of `candidates` with the smallest value. Gradients flow
/// only through the selected branch.
inline Var select_min(const std::vector<Var>& candidates) {
  if (candidates.empty()) throw ParameterError("select_min: empty candidate set");
  size_t best = 0;
  for (size_t k = 1; k < candidates.size(); ++k)
    if (candidates[k].item() < candidates[best].item()) best = k;
  return candidates[best];
}

}  // namespace rhino
