#pragma once

#include <cstdint>
#include <vector>

#include "sideslip/mlp/mlp.hpp"

namespace sideslip::mlp {

struct TrainConfig {
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double l2_rate = 1e-5;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  bool shuffle_each_epoch = true;

  void validate() const;
};

/// First/second moment estimates per parameter tensor plus the shared step
/// counter. beta powers are tracked incrementally to avoid pow().
struct AdamState {
  struct Slot {
    std::vector<double> m_w, v_w;
    std::vector<double> m_b, v_b;
  };
  std::vector<Slot> slots;
  std::uint64_t step = 0;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;

  static AdamState init(const MlpTopology& topology);
};

/// One bias-corrected Adam update over all parameter tensors; increments the
/// step counter exactly once.
void adam_step(MlpWeights& weights, const MlpGradients& grads,
               AdamState& state, const TrainConfig& config);

/// Flattened training set: count rows of feature_dim standardized features,
/// one unscaled geometric side-slip prior and one reference target each.
struct TrainingSet {
  std::size_t count = 0;
  std::size_t feature_dim = 0;
  std::vector<double> features;  // count x feature_dim, row-major
  std::vector<double> prior;     // count
  std::vector<double> target;    // count
};

struct TrainResult {
  MlpWeights weights;
  std::vector<double> epoch_loss;  // sample-weighted mean loss per epoch
};

/// Minibatch Adam over the full set for config.epochs epochs, shuffling each
/// epoch from the config seed. The last partial minibatch is used. Throws
/// DivergenceError if the loss becomes non-finite.
TrainResult train(const TrainingSet& data, const TrainConfig& config,
                  const MlpTopology& topology);

}  // namespace sideslip::mlp
