#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sideslip/common.hpp"

namespace sideslip::mlp {

/// Where the geometric side-slip prior enters the network: appended to the
/// first-stage output (default) or to the raw input vector (ablation).
enum class ConcatPoint { Stage2, Stage1Input };

const char* to_string(ConcatPoint c);
ConcatPoint concat_point_from_string(const std::string& s);

/// Two-stage feedforward topology. stage1_sizes/stage2_sizes list layer
/// widths including the input of each stage; hidden layers use tanh and the
/// final layer is linear. With ConcatPoint::Stage2 the first stage-2 width
/// equals the last stage-1 width plus one (the prior input).
struct MlpTopology {
  std::vector<std::size_t> stage1_sizes;
  std::vector<std::size_t> stage2_sizes;
  ConcatPoint concat_point = ConcatPoint::Stage2;

  /// Canonical sizes: stage 1 of 16/32/64/128 neurons, stage 2 of 32/16
  /// neurons plus a scalar output.
  static MlpTopology standard(std::size_t feature_dim = 8,
                              ConcatPoint concat = ConcatPoint::Stage2);

  /// Number of raw sensor features (excludes the prior input).
  std::size_t feature_dim() const {
    return concat_point == ConcatPoint::Stage2 ? stage1_sizes.front()
                                               : stage1_sizes.front() - 1;
  }

  struct LayerShape {
    std::size_t out, in;
    bool tanh;  // false on the final linear layer
  };
  std::vector<LayerShape> layers() const;
  std::size_t layer_count() const;
  /// Index of the first stage-2 layer in the flattened layer list.
  std::size_t stage2_first_layer() const { return stage1_sizes.size() - 1; }

  void validate() const;
};

struct LayerWeights {
  std::vector<double> w;  // row-major, out x in
  std::vector<double> b;  // out
};

struct MlpWeights {
  std::vector<LayerWeights> layers;

  bool all_finite() const;
};
using MlpGradients = MlpWeights;

/// Glorot-uniform initialization: weights drawn from
/// +-sqrt(6 / (fan_in + fan_out)), biases zero. Deterministic per seed.
MlpWeights xavier_init(const MlpTopology& topology, std::uint64_t seed);

MlpWeights zero_weights(const MlpTopology& topology);

/// Activations retained by the batched forward pass for backpropagation.
/// inputs[l] is the (batch x in) matrix fed to layer l (after any prior
/// concatenation); activations[l] its (batch x out) output.
struct ForwardCache {
  std::size_t batch = 0;
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> activations;
};

/// Batched forward pass. features is row-major (batch x feature_dim),
/// prior holds one geometric side-slip angle per sample and enters the
/// network unscaled at the topology's concat point. beta_hat receives one
/// estimate per sample.
void forward(const MlpWeights& weights, const MlpTopology& topology,
             std::span<const double> features, std::span<const double> prior,
             std::size_t batch, ForwardCache& cache,
             std::vector<double>& beta_hat);

/// Single-sample convenience wrapper.
double forward_one(const MlpWeights& weights, const MlpTopology& topology,
                   std::span<const double> features, double prior);

/// Mean squared error plus l2_rate * sum of squared weight-matrix entries
/// (biases excluded).
double loss(std::span<const double> beta_hat, std::span<const double> beta_ref,
            const MlpWeights& weights, double l2_rate);

/// Exact gradient of loss() with respect to every weight and bias, using the
/// activations cached by forward() on the same batch.
MlpGradients backward(const MlpWeights& weights, const MlpTopology& topology,
                      const ForwardCache& cache,
                      std::span<const double> beta_ref, double l2_rate);

}  // namespace sideslip::mlp
