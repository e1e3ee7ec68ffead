#include <doctest.h>

#include <cmath>
#include <vector>

#include "sideslip/mlp/train.hpp"
#include "sideslip/rng.hpp"

using namespace sideslip;
using namespace sideslip::mlp;

namespace {

struct Batch {
  std::size_t size;
  std::vector<double> features, prior, target;
};

Batch random_batch(Rng& rng, std::size_t n, std::size_t fd) {
  Batch b;
  b.size = n;
  b.features.resize(n * fd);
  b.prior.resize(n);
  b.target.resize(n);
  for (auto& v : b.features) v = rng.uniform(-1.5, 1.5);
  for (auto& v : b.prior) v = rng.uniform(-0.2, 0.2);
  for (auto& v : b.target) v = rng.uniform(-0.2, 0.2);
  return b;
}

double loss_at(const MlpWeights& w, const MlpTopology& topo, const Batch& b,
               double l2) {
  ForwardCache cache;
  std::vector<double> beta_hat;
  forward(w, topo, b.features, b.prior, b.size, cache, beta_hat);
  return loss(beta_hat, b.target, w, l2);
}

// Central-difference gradient check over every parameter of the network.
void check_gradients(const MlpTopology& topo, std::uint64_t seed) {
  Rng rng(seed);
  MlpWeights w = xavier_init(topo, rng.next_u64());
  const Batch b = random_batch(rng, 5, topo.feature_dim());
  const double l2 = 1e-4;

  ForwardCache cache;
  std::vector<double> beta_hat;
  forward(w, topo, b.features, b.prior, b.size, cache, beta_hat);
  const MlpGradients grads = backward(w, topo, cache, b.target, l2);

  const double h = 1e-6;
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    auto check_param = [&](std::vector<double>& param, std::size_t i,
                           double analytic) {
      const double saved = param[i];
      param[i] = saved + h;
      const double lp = loss_at(w, topo, b, l2);
      param[i] = saved - h;
      const double lm = loss_at(w, topo, b, l2);
      param[i] = saved;
      const double numeric = (lp - lm) / (2.0 * h);
      const double err = std::fabs(numeric - analytic);
      const bool ok = err <= 1e-6 || err <= 1e-4 * std::fabs(numeric);
      CHECK(ok);
    };
    for (std::size_t i = 0; i < w.layers[l].w.size(); ++i) {
      check_param(w.layers[l].w, i, grads.layers[l].w[i]);
    }
    for (std::size_t i = 0; i < w.layers[l].b.size(); ++i) {
      check_param(w.layers[l].b, i, grads.layers[l].b[i]);
    }
  }
}

}  // namespace

TEST_CASE("topology shapes") {
  const MlpTopology topo = MlpTopology::standard();
  CHECK(topo.feature_dim() == 8);
  const auto layers = topo.layers();
  REQUIRE(layers.size() == 7);
  CHECK(layers[0].in == 8);
  CHECK(layers[3].out == 128);
  CHECK(layers[4].in == 129);  // stage-1 output plus the prior
  CHECK(layers[6].out == 1);
  CHECK(!layers[6].tanh);

  const MlpTopology ablation =
      MlpTopology::standard(8, ConcatPoint::Stage1Input);
  CHECK(ablation.feature_dim() == 8);
  CHECK(ablation.layers()[0].in == 9);
  CHECK(ablation.layers()[4].in == 128);

  MlpTopology bad = topo;
  bad.stage2_sizes[0] = 128;
  CHECK_THROWS_AS(bad.validate(), ShapeError);
}

TEST_CASE("xavier initialization") {
  const MlpTopology topo = MlpTopology::standard();
  const MlpWeights w = xavier_init(topo, 42);
  const auto layers = topo.layers();

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const double bound = std::sqrt(
        6.0 / static_cast<double>(layers[l].in + layers[l].out));
    for (double v : w.layers[l].w) {
      CHECK(std::fabs(v) <= bound);
    }
    for (double v : w.layers[l].b) CHECK(v == 0.0);
  }
  // The 16->32 layer bound is sqrt(6/48).
  CHECK(std::sqrt(6.0 / 48.0) == doctest::Approx(0.3535533905932738));

  const MlpWeights w2 = xavier_init(topo, 42);
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    CHECK(w.layers[l].w == w2.layers[l].w);
  }
  const MlpWeights w3 = xavier_init(topo, 43);
  CHECK(w.layers[0].w != w3.layers[0].w);
}

TEST_CASE("forward pass basics") {
  const MlpTopology topo = MlpTopology::standard();
  const MlpWeights zeros = zero_weights(topo);
  std::vector<double> features(8, 0.7);

  CHECK(forward_one(zeros, topo, features, 0.3) == 0.0);

  // Hidden activations stay inside (-1, 1) for a random network.
  const MlpWeights w = xavier_init(topo, 1);
  ForwardCache cache;
  std::vector<double> beta_hat;
  forward(w, topo, features, std::vector<double>{0.3}, 1, cache, beta_hat);
  for (std::size_t l = 0; l + 1 < cache.activations.size(); ++l) {
    for (double a : cache.activations[l]) {
      CHECK(std::fabs(a) < 1.0);
    }
  }

  // The prior input is live: a finite perturbation changes the output.
  const double base = forward_one(w, topo, features, 0.3);
  const double moved = forward_one(w, topo, features, 0.31);
  CHECK(base != moved);

  std::vector<double> short_features(7, 0.0);
  CHECK_THROWS_AS(forward_one(w, topo, short_features, 0.0), ShapeError);

  // Sanity bound: with standardized inputs and fresh Xavier weights the
  // output stays well inside a radian.
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const MlpWeights fresh = xavier_init(topo, rng.next_u64());
    std::vector<double> z(8);
    for (auto& v : z) v = rng.normal();
    CHECK(std::fabs(forward_one(fresh, topo, z, rng.uniform(-0.2, 0.2))) <
          1.0);
  }
}

TEST_CASE("loss values") {
  const MlpTopology topo = MlpTopology::standard();
  const MlpWeights zeros = zero_weights(topo);

  const std::vector<double> a{0.01}, b{0.03};
  CHECK(loss(a, b, zeros, 1e-5) == doctest::Approx(4e-4).epsilon(1e-12));
  CHECK(loss(a, a, zeros, 1e-5) == 0.0);
  CHECK_THROWS_AS(loss({}, {}, zeros, 1e-5), ShapeError);
  const std::vector<double> c{0.01, 0.02};
  CHECK_THROWS_AS(loss(a, c, zeros, 1e-5), ShapeError);

  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> est{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const std::vector<double> ref{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    CHECK(loss(est, ref, zeros, 1e-5) >= 0.0);
  }
}

TEST_CASE("backprop matches central finite differences") {
  // Small two-stage nets in both concat modes, including the minimal
  // [3,4]+[5,...,1] shape.
  MlpTopology t1;
  t1.stage1_sizes = {3, 4};
  t1.stage2_sizes = {5, 1};
  t1.concat_point = ConcatPoint::Stage2;
  check_gradients(t1, 101);

  MlpTopology t2;
  t2.stage1_sizes = {4, 6, 5};
  t2.stage2_sizes = {6, 4, 1};
  t2.concat_point = ConcatPoint::Stage2;
  check_gradients(t2, 102);

  MlpTopology t3;
  t3.stage1_sizes = {4, 5, 6};
  t3.stage2_sizes = {6, 3, 1};
  t3.concat_point = ConcatPoint::Stage1Input;
  check_gradients(t3, 103);
}

TEST_CASE("gradient structure") {
  MlpTopology topo;
  topo.stage1_sizes = {3, 4};
  topo.stage2_sizes = {5, 1};

  SUBCASE("zero weights at a perfect fit give zero gradients") {
    const MlpWeights zeros = zero_weights(topo);
    Batch b;
    b.size = 3;
    b.features.assign(9, 0.5);
    b.prior.assign(3, 0.0);
    b.target.assign(3, 0.0);
    ForwardCache cache;
    std::vector<double> beta_hat;
    forward(zeros, topo, b.features, b.prior, b.size, cache, beta_hat);
    const MlpGradients g = backward(zeros, topo, cache, b.target, 1e-5);
    for (const auto& layer : g.layers) {
      for (double v : layer.w) CHECK(v == 0.0);
      for (double v : layer.b) CHECK(v == 0.0);
    }
  }

  SUBCASE("the regularizer contributes 2*l2*w on weights only") {
    Rng rng(7);
    const MlpWeights w = xavier_init(topo, 7);
    const Batch b = random_batch(rng, 4, topo.feature_dim());
    ForwardCache cache;
    std::vector<double> beta_hat;
    forward(w, topo, b.features, b.prior, b.size, cache, beta_hat);
    const MlpGradients with = backward(w, topo, cache, b.target, 1e-3);
    const MlpGradients without = backward(w, topo, cache, b.target, 0.0);
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
      for (std::size_t i = 0; i < w.layers[l].w.size(); ++i) {
        CHECK(with.layers[l].w[i] - without.layers[l].w[i] ==
              doctest::Approx(2e-3 * w.layers[l].w[i]).epsilon(1e-12));
      }
      for (std::size_t i = 0; i < w.layers[l].b.size(); ++i) {
        CHECK(with.layers[l].b[i] == without.layers[l].b[i]);
      }
    }
  }
}

TEST_CASE("adam step") {
  MlpTopology topo;
  topo.stage1_sizes = {1, 1};
  topo.stage2_sizes = {2, 1};
  TrainConfig config;

  SUBCASE("zero gradient leaves weights unchanged") {
    MlpWeights w = xavier_init(topo, 5);
    const MlpWeights before = w;
    MlpGradients g = zero_weights(topo);
    AdamState state = AdamState::init(topo);
    for (int i = 0; i < 10; ++i) adam_step(w, g, state, config);
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
      CHECK(w.layers[l].w == before.layers[l].w);
      CHECK(w.layers[l].b == before.layers[l].b);
    }
    CHECK(state.step == 10);
  }

  SUBCASE("quadratic convergence") {
    // Minimize (w - 3)^2 on a single scalar parameter.
    MlpWeights w = zero_weights(topo);
    MlpGradients g = zero_weights(topo);
    AdamState state = AdamState::init(topo);
    TrainConfig fast = config;
    fast.learning_rate = 1e-2;
    std::size_t steps = 0;
    for (; steps < 10000; ++steps) {
      if (std::fabs(w.layers[0].w[0] - 3.0) < 1e-3) break;
      g.layers[0].w[0] = 2.0 * (w.layers[0].w[0] - 3.0);
      adam_step(w, g, state, fast);
    }
    CHECK(std::fabs(w.layers[0].w[0] - 3.0) < 1e-3);
    CHECK(steps < 10000);
  }
}

TEST_CASE("training loop") {
  MlpTopology topo;
  topo.stage1_sizes = {2, 8};
  topo.stage2_sizes = {9, 4, 1};

  SUBCASE("a single sample is fitted within 30 epochs") {
    TrainingSet set;
    set.count = 1;
    set.feature_dim = 2;
    set.features = {0.4, -0.3};
    set.prior = {0.005};
    TrainConfig config;
    config.seed = 11;
    config.learning_rate = 2e-3;
    // Thirty single-sample Adam steps move the output by at most ~30*lr, so
    // place the target a modest distance from the freshly initialized net.
    const double start = forward_one(
        xavier_init(topo, derive_seed(config.seed, "init")), topo,
        set.features, set.prior[0]);
    set.target = {start + 0.02};
    const TrainResult r = train(set, config, topo);
    CHECK(r.epoch_loss.size() == config.epochs);
    const double fit = forward_one(r.weights, topo, set.features, 0.005);
    CHECK(std::fabs(fit - set.target[0]) < 1e-3);
  }

  SUBCASE("deterministic and loss-decreasing on random data") {
    Rng rng(31);
    TrainingSet set;
    set.count = 256;
    set.feature_dim = 2;
    for (std::size_t i = 0; i < set.count; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      const double y = rng.uniform(-1.0, 1.0);
      set.features.push_back(x);
      set.features.push_back(y);
      set.prior.push_back(0.1 * x);
      // A smooth nonlinear target the net can reduce loss on.
      set.target.push_back(0.1 * std::tanh(2.0 * x * y) + 0.05 * y);
    }
    TrainConfig config;
    config.epochs = 5;
    config.seed = 3;
    const TrainResult a = train(set, config, topo);
    CHECK(a.epoch_loss.size() == 5);
    CHECK(a.epoch_loss.back() < a.epoch_loss.front());
    CHECK(a.weights.all_finite());

    const TrainResult b = train(set, config, topo);
    for (std::size_t l = 0; l < a.weights.layers.size(); ++l) {
      CHECK(a.weights.layers[l].w == b.weights.layers[l].w);
      CHECK(a.weights.layers[l].b == b.weights.layers[l].b);
    }
  }

  SUBCASE("divergence is detected") {
    TrainingSet set;
    set.count = 8;
    set.feature_dim = 2;
    Rng rng(5);
    for (std::size_t i = 0; i < set.count; ++i) {
      set.features.push_back(rng.uniform(-1, 1));
      set.features.push_back(rng.uniform(-1, 1));
      set.prior.push_back(0.0);
      set.target.push_back(0.1);
    }
    TrainConfig config;
    // Adam's normalized step bounds each move near lr, so divergence to a
    // non-finite loss needs a step size that overflows the squared output.
    config.learning_rate = 1e200;
    config.epochs = 50;
    CHECK_THROWS_AS(train(set, config, topo), DivergenceError);
  }

  SUBCASE("empty set is rejected") {
    TrainingSet set;
    set.feature_dim = 2;
    CHECK_THROWS_AS(train(set, TrainConfig{}, topo), ConfigError);
  }
}
