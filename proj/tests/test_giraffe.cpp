#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "rhino/giraffe.hpp"
#include "rhino/gradcheck.hpp"
#include "rhino/optim.hpp"
#include "rhino/synth.hpp"

using namespace rhino;
using Catch::Approx;

namespace {

ScenarioBatch make_scenario(int64_t index = 0, int64_t scenario_seed = 1) {
  SynthConfig cfg;
  cfg.seed = static_cast<uint64_t>(scenario_seed);
  auto records = synth_scenario(cfg, index);
  WindowConfig wc;
  wc.stride = 80;
  auto result = window_scenarios(records, wc);
  REQUIRE(!result.scenarios.empty());
  return result.scenarios.front();
}

giraffe::Config small_config() {
  giraffe::Config cfg;
  cfg.dgcn.hidden = 16;
  cfg.dgcn.layers = 1;
  cfg.dgcn.cheb_order = 2;
  cfg.dec_hidden = 16;
  return cfg;
}

// scalar-loop reimplementation of the diffusion layer for the oracle
DenseArray dgcn_oracle(const DenseArray& adj, const DenseArray& h, const std::vector<DenseArray>& theta_f,
                       const std::vector<DenseArray>& theta_b, int64_t order) {
  const int64_t n = adj.dim(0);
  auto rownorm = [n](const DenseArray& a) {
    DenseArray out = a;
    for (int64_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (int64_t j = 0; j < n; ++j) s += a(i, j);
      for (int64_t j = 0; j < n; ++j) out(i, j) = a(i, j) / s;
    }
    return out;
  };
  auto matmul3 = [](const DenseArray& a, const DenseArray& b) {
    DenseArray c({a.dim(0), b.dim(1)});
    for (int64_t i = 0; i < a.dim(0); ++i)
      for (int64_t k = 0; k < a.dim(1); ++k)
        for (int64_t j = 0; j < b.dim(1); ++j) c(i, j) += a(i, k) * b(k, j);
    return c;
  };
  DenseArray at({n, n});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < n; ++j) at(i, j) = adj(j, i);
  DenseArray af = rownorm(adj), ab = rownorm(at);

  DenseArray out({h.dim(0), theta_f[0].dim(1)});
  for (const DenseArray* dir : {&af, &ab}) {
    const auto& thetas = (dir == &af) ? theta_f : theta_b;
    DenseArray t_prev = DenseArray::identity(n);
    DenseArray t_cur = *dir;
    for (int64_t k = 1; k <= order; ++k) {
      DenseArray term = matmul3(matmul3(t_cur, h), thetas[static_cast<size_t>(k - 1)]);
      for (int64_t i = 0; i < out.numel(); ++i) out[i] += term[i];
      DenseArray t_next({n, n});
      DenseArray prod = matmul3(*dir, t_cur);
      for (int64_t i = 0; i < n * n; ++i) t_next[i] = 2.0 * prod[i] - t_prev[i];
      t_prev = t_cur;
      t_cur = t_next;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("dgcn with identity adjacency and K=1 sums both directions", "[giraffe]") {
  ParameterStore store(3);
  SeededRng rng(4);
  DenseArray h = testutil::random_array({3, 2}, rng);
  DenseArray tf = testutil::random_array({2, 2}, rng);
  DenseArray tb = testutil::random_array({2, 2}, rng);
  store.set("d.theta_f1", tf);
  store.set("d.theta_b1", tb);
  DgcnConfig cfg{1, 1, 2};
  Tape tape;
  Var out = dgcn_layer(tape, store, "d", tape.constant(h), DenseArray::identity(3), cfg, 2);
  DenseArray expect = arr_matmul(h, arr_add(tf, tb));
  REQUIRE(arr_max_abs_diff(out.val(), expect) < 1e-12);
}

TEST_CASE("dgcn K=2 on a path graph matches the chebyshev oracle", "[giraffe]") {
  ParameterStore store(5);
  SeededRng rng(6);
  DenseArray adj({3, 3}, {1, 1, 0, 1, 1, 1, 0, 1, 1});
  DenseArray h = testutil::random_array({3, 4}, rng);
  std::vector<DenseArray> tf = {testutil::random_array({4, 3}, rng), testutil::random_array({4, 3}, rng)};
  std::vector<DenseArray> tb = {testutil::random_array({4, 3}, rng), testutil::random_array({4, 3}, rng)};
  store.set("d.theta_f1", tf[0]);
  store.set("d.theta_f2", tf[1]);
  store.set("d.theta_b1", tb[0]);
  store.set("d.theta_b2", tb[1]);
  DgcnConfig cfg{2, 1, 3};
  Tape tape;
  Var out = dgcn_layer(tape, store, "d", tape.constant(h), adj, cfg, 3);
  DenseArray expect = dgcn_oracle(adj, h, tf, tb, 2);
  REQUIRE(arr_max_abs_diff(out.val(), expect) < 1e-12);
}

TEST_CASE("dgcn rejects zero row sums", "[giraffe]") {
  ParameterStore store(1);
  Tape tape;
  DenseArray adj = DenseArray::zeros({2, 2});
  adj(0, 0) = 1.0;
  REQUIRE_THROWS_AS(
      dgcn_layer(tape, store, "d", tape.constant(DenseArray::ones({2, 2})), adj, DgcnConfig{1, 1, 2}, 2),
      ParameterError);
}

TEST_CASE("dgcn gradients through two layers match finite differences", "[giraffe]") {
  ParameterStore store(7);
  SeededRng rng(8);
  DenseArray adj({3, 3});
  for (int64_t i = 0; i < 3; ++i)
    for (int64_t j = 0; j < 3; ++j) adj(i, j) = (i == j) ? 1.0 : rng.uniform(0.1, 1.0);
  DenseArray h = testutil::random_array({3, 3}, rng);
  DgcnConfig cfg{2, 2, 4};
  auto fn = [&](Tape& tape, ParameterStore& s) {
    Var out = dgcn_stack(tape, s, "d", tape.constant(h), adj, cfg);
    return sum(square(out));
  };
  eval_scalar(fn, store);
  auto report = check_gradients(fn, store, 1e-5, 1e-4);
  INFO(report.to_string());
  REQUIRE(report.passed());
}

TEST_CASE("interaction encoding concatenates two halves", "[giraffe]") {
  auto cfg = small_config();
  ParameterStore store(11);
  auto sc = make_scenario();
  const int64_t n = sc.n_agents();
  Tape tape;
  auto emb = giraffe::encode_interactions(tape, store, cfg, sc.history, DenseArray::ones({n, n}));
  REQUIRE(emb.joint.shape() == Shape{n, 2 * cfg.dgcn.hidden});
  REQUIRE(arr_max_abs_diff(slice(emb.joint, 1, 0, cfg.dgcn.hidden).val(), emb.hist.val()) == 0.0);
}

TEST_CASE("identical agents receive identical embeddings", "[giraffe]") {
  auto cfg = small_config();
  ParameterStore store(13);
  DenseArray history({cfg.history_len, 3, 4});
  SeededRng rng(14);
  for (int64_t t = 0; t < cfg.history_len; ++t)
    for (int64_t c = 0; c < 4; ++c) {
      double v = rng.uniform(-1.0, 1.0);
      history(t, 0, c) = v;
      history(t, 1, c) = v;  // agent 1 duplicates agent 0
      history(t, 2, c) = rng.uniform(-1.0, 1.0);
    }
  Tape tape;
  auto emb = giraffe::encode_interactions(tape, store, cfg, history, DenseArray::ones({3, 3}));
  for (int64_t c = 0; c < 2 * cfg.dgcn.hidden; ++c)
    REQUIRE(emb.joint.val()(0, c) == Approx(emb.joint.val()(1, c)).margin(1e-12));
}

TEST_CASE("every input feature reaches the embedding", "[giraffe]") {
  auto cfg = small_config();
  cfg.history_len = 4;
  ParameterStore store(15);
  SeededRng rng(16);
  DenseArray history = testutil::random_array({4, 2, 4}, rng);
  DenseArray adjacency = DenseArray::ones({2, 2});
  Tape base;
  auto emb0 = giraffe::encode_interactions(base, store, cfg, history, adjacency);
  for (int64_t i = 0; i < history.numel(); ++i) {
    DenseArray bumped = history;
    bumped[i] += 0.05;
    Tape tape;
    auto emb = giraffe::encode_interactions(tape, store, cfg, bumped, adjacency);
    REQUIRE(arr_max_abs_diff(emb.joint.val(), emb0.joint.val()) > 1e-9);
  }
}

TEST_CASE("intention rows are stochastic and zero head is uniform", "[giraffe]") {
  auto cfg = small_config();
  ParameterStore store(17);
  auto sc = make_scenario();
  const int64_t n = sc.n_agents();
  Tape tape;
  auto emb = giraffe::encode_interactions(tape, store, cfg, sc.history, DenseArray::ones({n, n}));
  Var probs = giraffe::predict_intentions(tape, store, cfg, emb.joint);
  REQUIRE(probs.shape() == Shape{n, 3});
  for (int64_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (int64_t c = 0; c < 3; ++c) total += probs.val()(i, c);
    REQUIRE(total == Approx(1.0).margin(1e-12));
  }

  store.set("giraffe.lat.w0", DenseArray::zeros(store.value("giraffe.lat.w0").shape()));
  store.set("giraffe.lat.b0", DenseArray::zeros(store.value("giraffe.lat.b0").shape()));
  Tape tape2;
  auto emb2 = giraffe::encode_interactions(tape2, store, cfg, sc.history, DenseArray::ones({n, n}));
  Var uniform = giraffe::predict_intentions(tape2, store, cfg, emb2.joint);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t c = 0; c < 3; ++c) REQUIRE(uniform.val()(i, c) == Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("decoder shapes and zero-head displacement case", "[giraffe]") {
  auto cfg = small_config();
  ParameterStore store(19);
  auto sc = make_scenario();
  const int64_t n = sc.n_agents();
  Tape tape;
  auto emb = giraffe::encode_interactions(tape, store, cfg, sc.history, DenseArray::ones({n, n}));
  Var probs = giraffe::predict_intentions(tape, store, cfg, emb.joint);
  auto fc = giraffe::decode_multimodal(tape, store, cfg, emb.joint, probs, giraffe::last_positions_of(sc));
  REQUIRE(fc.trajectories.shape() == Shape{50, n, 3, 2});
  REQUIRE(fc.gaussian_params.shape() == Shape{50, n, 3, 5});

  // zero output head -> zero displacements, trajectory holds the anchor
  store.set("giraffe.dec.out.w0", DenseArray::zeros(store.value("giraffe.dec.out.w0").shape()));
  store.set("giraffe.dec.out.b0", DenseArray::zeros(store.value("giraffe.dec.out.b0").shape()));
  Tape tape2;
  auto emb2 = giraffe::encode_interactions(tape2, store, cfg, sc.history, DenseArray::ones({n, n}));
  Var probs2 = giraffe::predict_intentions(tape2, store, cfg, emb2.joint);
  DenseArray anchor = giraffe::last_positions_of(sc);
  auto fc2 = giraffe::decode_multimodal(tape2, store, cfg, emb2.joint, probs2, anchor);
  for (int64_t i = 0; i < fc2.displacements.numel(); ++i) REQUIRE(fc2.displacements.val()[i] == 0.0);
  for (int64_t f = 0; f < 50; ++f)
    for (int64_t i = 0; i < n; ++i)
      for (int64_t m = 0; m < 3; ++m)
        for (int64_t c = 0; c < 2; ++c)
          REQUIRE(fc2.trajectories.val()(f, i, m, c) == Approx(anchor(i, c)).margin(1e-12));
}

TEST_CASE("loss terms reproduce closed-form values", "[giraffe]") {
  const int64_t f_len = 50, n = 4;
  Tape tape;
  SeededRng rng(23);
  DenseArray truth = testutil::random_array({f_len, n, 2}, rng, -5.0, 5.0);

  // forecast whose keep-mode equals the truth, one-hot keep intents
  DenseArray traj({f_len, n, 3, 2});
  for (int64_t f = 0; f < f_len; ++f)
    for (int64_t i = 0; i < n; ++i)
      for (int64_t c = 0; c < 2; ++c) traj(f, i, kIntentKeep, c) = truth(f, i, c);
  DenseArray intents({n, 3});
  DenseArray labels({n, 3});
  for (int64_t i = 0; i < n; ++i) {
    intents(i, kIntentKeep) = 1.0;
    labels(i, kIntentKeep) = 1.0;
  }
  DenseArray hf = testutil::random_array({n, 8}, rng);

  giraffe::Forecast fc;
  fc.trajectories = tape.constant(traj);
  auto perfect = giraffe::giraffe_loss(tape, fc, tape.constant(intents), truth, labels,
                                       tape.constant(hf), hf);
  REQUIRE(perfect.total.item() == Approx(0.0).margin(1e-12));

  // uniform intents vs any one-hot labels -> ln 3
  DenseArray uniform = DenseArray::full({n, 3}, 1.0 / 3.0);
  auto ln3 = giraffe::giraffe_loss(tape, fc, tape.constant(uniform), truth, labels, tape.constant(hf), hf);
  REQUIRE(ln3.intent.item() == Approx(std::log(3.0)).epsilon(1e-12));

  // constant 1 m offset in both coordinates -> L_pred = 2
  DenseArray off = traj;
  for (int64_t f = 0; f < f_len; ++f)
    for (int64_t i = 0; i < n; ++i)
      for (int64_t c = 0; c < 2; ++c) off(f, i, kIntentKeep, c) += 1.0;
  giraffe::Forecast fc_off;
  fc_off.trajectories = tape.constant(off);
  auto shifted = giraffe::giraffe_loss(tape, fc_off, tape.constant(intents), truth, labels,
                                       tape.constant(hf), hf);
  REQUIRE(shifted.pred.item() == Approx(2.0).epsilon(1e-12));
}

TEST_CASE("forward pass is permutation equivariant", "[giraffe]") {
  auto cfg = small_config();
  ParameterStore store(29);
  auto sc = make_scenario();
  const int64_t n = sc.n_agents();

  Tape tape;
  auto out = giraffe::training_step(tape, store, cfg, sc);

  // permute agents cyclically
  std::vector<int64_t> perm(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = (i + 1) % n;
  ScenarioBatch permuted = sc;
  for (int64_t t = 0; t < sc.history_len(); ++t)
    for (int64_t i = 0; i < n; ++i)
      for (int64_t c = 0; c < 4; ++c)
        permuted.history(t, perm[static_cast<size_t>(i)], c) = sc.history(t, i, c);
  for (int64_t t = 0; t < sc.future_len(); ++t)
    for (int64_t i = 0; i < n; ++i)
      for (int64_t c = 0; c < 2; ++c)
        permuted.future_truth(t, perm[static_cast<size_t>(i)], c) = sc.future_truth(t, i, c);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t c = 0; c < 3; ++c)
      permuted.intention_labels(perm[static_cast<size_t>(i)], c) = sc.intention_labels(i, c);

  Tape tape2;
  auto out2 = giraffe::training_step(tape2, store, cfg, permuted);

  for (int64_t i = 0; i < n; ++i) {
    int64_t pi = perm[static_cast<size_t>(i)];
    for (int64_t c = 0; c < 2 * cfg.dgcn.hidden; ++c)
      REQUIRE(out2.emb.joint.val()(pi, c) == Approx(out.emb.joint.val()(i, c)).margin(1e-10));
    for (int64_t c = 0; c < 3; ++c)
      REQUIRE(out2.intents.val()(pi, c) == Approx(out.intents.val()(i, c)).margin(1e-10));
    for (int64_t f = 0; f < 50; f += 17)
      for (int64_t m = 0; m < 3; ++m)
        for (int64_t c = 0; c < 2; ++c)
          REQUIRE(out2.forecast.trajectories.val()(f, pi, m, c) ==
                  Approx(out.forecast.trajectories.val()(f, i, m, c)).margin(1e-10));
  }
}

TEST_CASE("forward pass is deterministic", "[giraffe]") {
  auto cfg = small_config();
  ParameterStore store(31);
  auto sc = make_scenario();
  Tape t1, t2;
  auto a = giraffe::training_step(t1, store, cfg, sc);
  auto b = giraffe::training_step(t2, store, cfg, sc);
  REQUIRE(a.loss.total.item() == b.loss.total.item());
  REQUIRE(arr_max_abs_diff(a.forecast.trajectories.val(), b.forecast.trajectories.val()) == 0.0);
}

TEST_CASE("loss decreases over the first training steps", "[giraffe]") {
  auto cfg = small_config();
  ParameterStore store(37);
  auto sc = make_scenario();
  AdamOptimizer opt(1e-3);
  double first = 0.0, last = 0.0;
  for (int step = 0; step < 50; ++step) {
    store.zero_grads();
    Tape tape;
    auto out = giraffe::training_step(tape, store, cfg, sc);
    double loss = out.loss.total.item();
    REQUIRE(out.loss.pred.item() >= 0.0);
    REQUIRE(out.loss.intent.item() >= 0.0);
    REQUIRE(out.loss.future.item() >= 0.0);
    if (step == 0) first = loss;
    last = loss;
    tape.backward(out.loss.total);
    opt.step(store);
  }
  REQUIRE(last < first);
}

TEST_CASE("overfits one constant-velocity scenario", "[giraffe][slow]") {
  auto cfg = small_config();
  ParameterStore store(41);
  auto sc = make_scenario(0);  // even index: pure lane keeping
  AdamOptimizer opt(1e-2);
  double pred = 1e9;
  for (int step = 0; step < 1500 && pred > 5e-4; ++step) {
    store.zero_grads();
    Tape tape;
    auto out = giraffe::training_step(tape, store, cfg, sc);
    pred = out.loss.pred.item();
    tape.backward(out.loss.total);
    opt.step(store);
  }
  REQUIRE(pred < 1e-3);

  // intention head also settles on the labels
  auto result = giraffe::predict(store, cfg, sc);
  for (int64_t i = 0; i < sc.n_agents(); ++i) {
    int64_t want = 0;
    for (int64_t c = 1; c < 3; ++c)
      if (sc.intention_labels(i, c) > sc.intention_labels(i, want)) want = c;
    int64_t got = 0;
    for (int64_t c = 1; c < 3; ++c)
      if (result.intentions(i, c) > result.intentions(i, got)) got = c;
    REQUIRE(got == want);
  }
}
