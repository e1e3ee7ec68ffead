#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sideslip/mlp/train.hpp"
#include "sideslip/sim/simulator.hpp"
#include "sideslip/vehicle/vehicle.hpp"

namespace sideslip::hybrid {

inline constexpr std::size_t kFeatureCount = 8;

/// Canonical input-channel order of the learned observer.
inline constexpr std::array<const char*, kFeatureCount> kFeatureChannels = {
    "ax", "ay", "yaw_rate", "w_fl", "w_fr", "w_rl", "w_rr", "delta"};

std::array<double, kFeatureCount> raw_features(const sim::SensorFrame& f);

/// Per-channel z-scoring with training-set statistics (population std).
struct Standardizer {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> stddev{};

  std::array<double, kFeatureCount> apply(const sim::SensorFrame& f) const;
};

/// Fits mean and population standard deviation over the training frames
/// only. Rejects degenerate (zero-variance) channels by name.
Standardizer fit_standardizer(std::span<const sim::SensorFrame> frames);

/// One inference step: standardized sensor features through stage 1, the
/// geometric side-slip prior (computed from the measured steering, fed
/// unscaled) at the concat point, stage 2 yields the estimate.
double estimate(const mlp::MlpWeights& weights,
                const mlp::MlpTopology& topology, const Standardizer& std,
                const sim::SensorFrame& frame,
                const vehicle::VehicleParams& params);

/// Frame-wise map of estimate(); the observer is stateless across frames.
std::vector<double> run_hybrid(std::span<const sim::SensorFrame> log,
                               const mlp::MlpWeights& weights,
                               const mlp::MlpTopology& topology,
                               const Standardizer& std,
                               const vehicle::VehicleParams& params);

/// Assembles the flattened training set from aligned sensor/reference logs:
/// standardized features, unscaled prior, reference side-slip target.
mlp::TrainingSet make_training_set(
    std::span<const sim::Trajectory* const> trajectories,
    const Standardizer& std, const vehicle::VehicleParams& params);

}  // namespace sideslip::hybrid
