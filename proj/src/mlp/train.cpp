#include "sideslip/mlp/train.hpp"

#include <cmath>
#include <cstring>
#include <numeric>

#include "sideslip/kernels/kernels.hpp"
#include "sideslip/rng.hpp"

namespace sideslip::mlp {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate <= 0");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("train: adam betas must lie in (0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("train: adam eps <= 0");
  if (l2_rate < 0.0) throw ConfigError("train: l2 rate < 0");
  if (batch_size < 1) throw ConfigError("train: batch size < 1");
  if (epochs < 1) throw ConfigError("train: epochs < 1");
}

AdamState AdamState::init(const MlpTopology& topology) {
  AdamState state;
  for (const auto& shape : topology.layers()) {
    Slot slot;
    slot.m_w.assign(shape.out * shape.in, 0.0);
    slot.v_w.assign(shape.out * shape.in, 0.0);
    slot.m_b.assign(shape.out, 0.0);
    slot.v_b.assign(shape.out, 0.0);
    state.slots.push_back(std::move(slot));
  }
  return state;
}

void adam_step(MlpWeights& weights, const MlpGradients& grads,
               AdamState& state, const TrainConfig& config) {
  if (weights.layers.size() != grads.layers.size() ||
      weights.layers.size() != state.slots.size()) {
    throw ShapeError("adam: layer count mismatch");
  }
  state.step += 1;
  state.beta1_pow *= config.adam_beta1;
  state.beta2_pow *= config.adam_beta2;
  const kernels::AdamConsts consts{
      config.learning_rate, config.adam_beta1, config.adam_beta2,
      config.adam_eps,      1.0 - state.beta1_pow, 1.0 - state.beta2_pow};
  const auto& ops = kernels::active();
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    auto& layer = weights.layers[l];
    const auto& g = grads.layers[l];
    auto& slot = state.slots[l];
    if (layer.w.size() != g.w.size() || layer.b.size() != g.b.size()) {
      throw ShapeError("adam: gradient shape mismatch at layer " +
                       std::to_string(l));
    }
    ops.adam_update(layer.w.data(), g.w.data(), slot.m_w.data(),
                    slot.v_w.data(), layer.w.size(), consts);
    ops.adam_update(layer.b.data(), g.b.data(), slot.m_b.data(),
                    slot.v_b.data(), layer.b.size(), consts);
  }
}

TrainResult train(const TrainingSet& data, const TrainConfig& config,
                  const MlpTopology& topology) {
  config.validate();
  topology.validate();
  if (data.count == 0) throw ConfigError("train: empty training set");
  if (data.feature_dim != topology.feature_dim()) {
    throw ShapeError("train: feature dimension does not match topology");
  }
  if (data.features.size() != data.count * data.feature_dim ||
      data.prior.size() != data.count || data.target.size() != data.count) {
    throw ShapeError("train: training set arrays are inconsistent");
  }

  TrainResult result;
  result.weights = xavier_init(topology, derive_seed(config.seed, "init"));
  AdamState adam = AdamState::init(topology);
  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));

  std::vector<std::size_t> order(data.count);
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t fd = data.feature_dim;
  std::vector<double> batch_features(config.batch_size * fd);
  std::vector<double> batch_prior(config.batch_size);
  std::vector<double> batch_target(config.batch_size);
  std::vector<double> beta_hat;
  ForwardCache cache;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle_each_epoch) shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < data.count;
         start += config.batch_size) {
      const std::size_t bs = std::min(config.batch_size, data.count - start);
      for (std::size_t s = 0; s < bs; ++s) {
        const std::size_t src = order[start + s];
        std::memcpy(batch_features.data() + s * fd,
                    data.features.data() + src * fd, fd * sizeof(double));
        batch_prior[s] = data.prior[src];
        batch_target[s] = data.target[src];
      }
      forward(result.weights, topology,
              std::span(batch_features.data(), bs * fd),
              std::span(batch_prior.data(), bs), bs, cache, beta_hat);
      const double batch_loss =
          loss(beta_hat, std::span(batch_target.data(), bs), result.weights,
               config.l2_rate);
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError("train: non-finite loss at epoch " +
                              std::to_string(epoch));
      }
      loss_sum += batch_loss * static_cast<double>(bs);
      const MlpGradients grads =
          backward(result.weights, topology, cache,
                   std::span(batch_target.data(), bs), config.l2_rate);
      adam_step(result.weights, grads, adam, config);
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(data.count));
  }
  return result;
}

}  // namespace sideslip::mlp
