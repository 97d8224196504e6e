#pragma once

#include <string>
#include <vector>

#include "rhino/dgcn.hpp"
#include "rhino/ops.hpp"
#include "rhino/scenario.hpp"

namespace rhino {
namespace giraffe {

struct Config {
  int64_t history_len = 30;
  int64_t future_len = 50;
  int64_t modes = 3;
  DgcnConfig dgcn;
  int64_t mix_slots = 2;    // softmax-normalized gates over embedding chunks
  int64_t dec_hidden = 64;  // decoder GRU width
  double pos_scale = 0.01;  // meters -> model units on encoder inputs
  double vel_scale = 0.1;

  int64_t embed_width() const { return 2 * dgcn.hidden; }

  void validate() const {
    dgcn.validate();
    if (modes != 3) throw ConfigError("giraffe models the 3 lateral modes");
    if (mix_slots < 2 || embed_width() % mix_slots != 0)
      throw ConfigError("mix_slots must divide the concatenated embedding width");
  }
};

struct Embeddings {
  Var joint;     // [N x 2d] = [hist, future-guided]
  Var hist;      // [N x d]
  Var fut_pred;  // [N x d], the future-guided half
};

/// Flattens [T x N x C] into per-agent rows [N x T*C], scaling position
/// channels (0, 1) and velocity channels (2, 3) into model units.
inline DenseArray flatten_time_major(const DenseArray& seq, double pos_scale, double vel_scale) {
  const int64_t t = seq.dim(0), n = seq.dim(1), c = seq.dim(2);
  DenseArray out({n, t * c});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t s = 0; s < t; ++s)
      for (int64_t k = 0; k < c; ++k)
        out(i, s * c + k) = seq(s, i, k) * (k < 2 ? pos_scale : vel_scale);
  return out;
}

/// Historical and future-guided DGCN embeddings, concatenated.
inline Embeddings encode_interactions(Tape& tape, ParameterStore& store, const Config& cfg,
                                      const DenseArray& history, const DenseArray& adjacency) {
  cfg.validate();
  if (history.ndim() != 3 || history.dim(2) != 4)
    throw DimensionError("giraffe history must be [T x N x 4], got " + shape_str(history.shape()));
  Var input = tape.constant(flatten_time_major(history, cfg.pos_scale, cfg.vel_scale));
  Embeddings e;
  e.hist = dgcn_stack(tape, store, "giraffe.enc_h", input, adjacency, cfg.dgcn);
  e.fut_pred = dgcn_stack(tape, store, "giraffe.enc_f", input, adjacency, cfg.dgcn);
  e.joint = concat({e.hist, e.fut_pred}, 1);
  return e;
}

/// Constant regression target for the future-guided half: the true
/// future states pushed through a separate encoder whose parameters stay
/// at their initialization (they are created here but never receive
/// gradients).
inline DenseArray future_embedding_target(ParameterStore& store, const Config& cfg,
                                          const DenseArray& truth_future, const DenseArray& adjacency) {
  Tape tape(false);
  Var input = tape.constant(flatten_time_major(truth_future, cfg.pos_scale, cfg.vel_scale));
  Var out = dgcn_stack(tape, store, "giraffe.enc_t", input, adjacency, cfg.dgcn);
  return out.val();
}

/// Row-stochastic [N x 3] over {left, keep, right}.
inline Var predict_intentions(Tape& tape, ParameterStore& store, const Config& cfg, Var joint) {
  const int64_t w = cfg.embed_width();
  const int64_t mid = std::max<int64_t>(cfg.dgcn.hidden / 2, 4);
  Var ip = mlp_forward(tape, store, "giraffe.ip", joint, {w, cfg.dgcn.hidden, mid}, Activation::Relu);
  Var logits = mlp_forward(tape, store, "giraffe.lat", relu(ip), {mid, 3});
  return softmax(logits, 1);
}

struct Forecast {
  Var trajectories;    // [F x N x M x 2] positions
  Var displacements;   // [F x N x M x 2] raw per-step deltas from the head
  Var gaussian_params; // [F x N x M x 5] (mux, muy, sigx, sigy, rho)
};

/// Intention-gated multi-modal GRU decoding. The intention distribution
/// mixes fixed chunks of the joint embedding through a trainable map;
/// each mode decodes from the gated embedding plus its one-hot id. The
/// head emits per-step displacements which integrate from each agent's
/// last observed position.
inline Forecast decode_multimodal(Tape& tape, ParameterStore& store, const Config& cfg, Var joint,
                                  Var intents, const DenseArray& last_states) {
  cfg.validate();
  const int64_t n = joint.val().dim(0);
  const int64_t w = cfg.embed_width();
  const int64_t chunk = w / cfg.mix_slots;
  const int64_t f_len = cfg.future_len;
  const int64_t m = cfg.modes;
  if (last_states.ndim() != 2 || last_states.dim(0) != n || last_states.dim(1) != 4)
    throw DimensionError("decode: last states must be [N x 4]");

  store.get_or_init("giraffe.dec.map", {cfg.mix_slots, 3}, cfg.mix_slots, 3);
  Var w_map = tape.param(store, "giraffe.dec.map");
  Var gates = softmax(matmul(intents, transpose(w_map)), 1);  // [N x slots]

  Var mixed{};
  for (int64_t s = 0; s < cfg.mix_slots; ++s) {
    Var part = mul(slice(joint, 1, s * chunk, chunk), slice(gates, 1, s, 1));
    mixed = mixed.valid() ? add(mixed, part) : part;
  }

  // last observed state rows, in model units, skip the embedding bottleneck
  DenseArray state_feat({n, 4});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t c = 0; c < 4; ++c)
      state_feat(i, c) = last_states(i, c) * (c < 2 ? cfg.pos_scale : cfg.vel_scale);
  Var state = tape.constant(state_feat);

  // per-mode seeds stacked mode-major: row m*N+i
  std::vector<Var> seeds;
  for (int64_t mm = 0; mm < m; ++mm) {
    DenseArray onehot({n, m});
    for (int64_t i = 0; i < n; ++i) onehot(i, mm) = 1.0;
    seeds.push_back(concat({mixed, intents, tape.constant(onehot), state}, 1));
  }
  Var seed = mlp_forward(tape, store, "giraffe.dec.in", concat(seeds, 0),
                         {chunk + 3 + m + 4, cfg.dec_hidden}, Activation::Relu);
  seed = tanh(seed);

  std::vector<Var> steps(static_cast<size_t>(f_len), reshape(seed, {1, m * n, cfg.dec_hidden}));
  Var sequence = concat(steps, 0);
  Var states = gru_forward(tape, store, "giraffe.dec.gru", sequence, cfg.dec_hidden);

  Var head = mlp_forward(tape, store, "giraffe.dec.out", reshape(states, {f_len * m * n, cfg.dec_hidden}),
                         {cfg.dec_hidden, 5});
  Var packed = reshape(head, {f_len, m * n, 5});

  // anchor per behavior node, mode-major rows
  DenseArray anchor({m * n, 2});
  for (int64_t mm = 0; mm < m; ++mm)
    for (int64_t i = 0; i < n; ++i) {
      anchor(mm * n + i, 0) = last_states(i, 0);
      anchor(mm * n + i, 1) = last_states(i, 1);
    }

  Var pos = tape.constant(anchor);  // [M*N x 2]
  std::vector<Var> positions;
  positions.reserve(static_cast<size_t>(f_len));
  for (int64_t f = 0; f < f_len; ++f) {
    Var delta = reshape(slice(slice(packed, 0, f, 1), 2, 0, 2), {m * n, 2});
    pos = add(pos, delta);
    positions.push_back(reshape(pos, {1, m * n, 2}));
  }
  Var traj_packed = concat(positions, 0);  // [F x M*N x 2]

  // [F x M*N x c] -> [F x N x M x c] per-mode assembly
  std::vector<Var> mode_traj, mode_delta, mode_gauss;
  for (int64_t mm = 0; mm < m; ++mm) {
    Var mu = slice(traj_packed, 1, mm * n, n);  // [F x N x 2]
    Var block = slice(packed, 1, mm * n, n);    // [F x N x 5]
    Var delta = slice(block, 2, 0, 2);
    Var sig = softplus(slice(block, 2, 2, 2));
    Var rho = tanh(slice(block, 2, 4, 1));
    mode_traj.push_back(reshape(mu, {f_len, n, 1, 2}));
    mode_delta.push_back(reshape(delta, {f_len, n, 1, 2}));
    mode_gauss.push_back(reshape(concat({mu, sig, rho}, 2), {f_len, n, 1, 5}));
  }
  Forecast fc;
  fc.trajectories = concat(mode_traj, 2);
  fc.displacements = concat(mode_delta, 2);
  fc.gaussian_params = concat(mode_gauss, 2);
  return fc;
}

struct LossTerms {
  Var total;
  Var pred;  // fused-trajectory MSE, mean over (frame, agent) points
  Var intent;
  Var future;
};

/// Probability-weighted fusion of per-mode trajectories: [F x N x 2].
inline Var fuse_forecast(Var trajectories, Var intents) {
  const Shape& s = trajectories.shape();
  const int64_t f_len = s[0], n = s[1], m = s[2];
  Var fused{};
  for (int64_t mm = 0; mm < m; ++mm) {
    Var traj_m = reshape(slice(trajectories, 2, mm, 1), {f_len, n, 2});
    Var p_m = slice(intents, 1, mm, 1);  // [N x 1] broadcasts over frames and coords
    Var part = mul(traj_m, p_m);
    fused = fused.valid() ? add(fused, part) : part;
  }
  return fused;
}

inline LossTerms giraffe_loss(Tape& tape, const Forecast& forecast, Var intents,
                              const DenseArray& truth_future, const DenseArray& truth_intents,
                              Var fut_pred, const DenseArray& fut_target) {
  const int64_t f_len = truth_future.dim(0);
  const int64_t n = truth_future.dim(1);

  Var fused = fuse_forecast(forecast.trajectories, intents);
  LossTerms out;
  out.pred = mse_over(fused, tape.constant(truth_future), static_cast<double>(f_len * n));

  // NLL of the labeled class; labels are one-hot so the inner sum picks
  // the predicted probability of the true class
  Var true_prob = matmul(mul(intents, tape.constant(truth_intents)), tape.constant(DenseArray::ones({3, 1})));
  out.intent = scale(sum(log(true_prob)), -1.0 / static_cast<double>(n));

  out.future = mse_over(fut_pred, tape.constant(fut_target), static_cast<double>(fut_target.numel()));
  out.total = add(add(out.pred, out.intent), out.future);
  return out;
}

/// Full forward + loss on one scenario.
struct StepOutput {
  Embeddings emb;
  Var intents;
  Forecast forecast;
  LossTerms loss;
};

/// Last-history state per agent, [N x 4].
inline DenseArray last_states_of(const ScenarioBatch& sc) {
  const int64_t n = sc.n_agents();
  const int64_t t_last = sc.history_len() - 1;
  DenseArray pos({n, 4});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t c = 0; c < 4; ++c) pos(i, c) = sc.history(t_last, i, c);
  return pos;
}

inline StepOutput training_step(Tape& tape, ParameterStore& store, const Config& cfg,
                                const ScenarioBatch& sc) {
  const int64_t n = sc.n_agents();
  DenseArray adjacency = DenseArray::ones({n, n});
  StepOutput out;
  out.emb = encode_interactions(tape, store, cfg, sc.history, adjacency);
  out.intents = predict_intentions(tape, store, cfg, out.emb.joint);
  out.forecast = decode_multimodal(tape, store, cfg, out.emb.joint, out.intents, last_positions_of(sc));
  DenseArray target = future_embedding_target(store, cfg, sc.future_truth, adjacency);
  out.loss = giraffe_loss(tape, out.forecast, out.intents, sc.future_truth, sc.intention_labels,
                          out.emb.fut_pred, target);
  return out;
}

/// Deterministic inference: per-mode trajectories and intention probs.
struct Prediction {
  DenseArray trajectories;  // [F x N x M x 2]
  DenseArray intentions;    // [N x 3]
};

inline Prediction predict(ParameterStore& store, const Config& cfg, const ScenarioBatch& sc) {
  Tape tape(false);
  const int64_t n = sc.n_agents();
  DenseArray adjacency = DenseArray::ones({n, n});
  Embeddings emb = encode_interactions(tape, store, cfg, sc.history, adjacency);
  Var intents = predict_intentions(tape, store, cfg, emb.joint);
  Forecast fc = decode_multimodal(tape, store, cfg, emb.joint, intents, last_positions_of(sc));
  return Prediction{fc.trajectories.val(), intents.val()};
}

}  // namespace giraffe
}  // namespace rhino
