#include "sideslip/hybrid/hybrid.hpp"

#include <cmath>

namespace sideslip::hybrid {

std::array<double, kFeatureCount> raw_features(const sim::SensorFrame& f) {
  return {f.accel_x,  f.accel_y,  f.yaw_rate, f.wheel_fl,
          f.wheel_fr, f.wheel_rl, f.wheel_rr, f.steer};
}

std::array<double, kFeatureCount> Standardizer::apply(
    const sim::SensorFrame& f) const {
  auto x = raw_features(f);
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    x[c] = (x[c] - mean[c]) / stddev[c];
  }
  return x;
}

Standardizer fit_standardizer(std::span<const sim::SensorFrame> frames) {
  if (frames.size() < 2) {
    throw ConfigError("standardizer: need at least two frames");
  }
  Standardizer std_out;
  const double n = static_cast<double>(frames.size());
  for (const auto& f : frames) {
    const auto x = raw_features(f);
    for (std::size_t c = 0; c < kFeatureCount; ++c) std_out.mean[c] += x[c];
  }
  for (std::size_t c = 0; c < kFeatureCount; ++c) std_out.mean[c] /= n;
  for (const auto& f : frames) {
    const auto x = raw_features(f);
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      const double d = x[c] - std_out.mean[c];
      std_out.stddev[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    std_out.stddev[c] = std::sqrt(std_out.stddev[c] / n);
    if (!(std_out.stddev[c] > 1e-12)) {
      throw ConfigError(std::string("standardizer: channel '") +
                        kFeatureChannels[c] + "' has zero variance");
    }
  }
  return std_out;
}

double estimate(const mlp::MlpWeights& weights,
                const mlp::MlpTopology& topology, const Standardizer& std,
                const sim::SensorFrame& frame,
                const vehicle::VehicleParams& params) {
  const auto features = std.apply(frame);
  const double prior = vehicle::kinematic_sideslip(frame.steer, params);
  return mlp::forward_one(weights, topology,
                          std::span(features.data(), features.size()), prior);
}

std::vector<double> run_hybrid(std::span<const sim::SensorFrame> log,
                               const mlp::MlpWeights& weights,
                               const mlp::MlpTopology& topology,
                               const Standardizer& std,
                               const vehicle::VehicleParams& params) {
  std::vector<double> beta;
  beta.reserve(log.size());
  for (const auto& frame : log) {
    beta.push_back(estimate(weights, topology, std, frame, params));
  }
  return beta;
}

mlp::TrainingSet make_training_set(
    std::span<const sim::Trajectory* const> trajectories,
    const Standardizer& std, const vehicle::VehicleParams& params) {
  mlp::TrainingSet set;
  set.feature_dim = kFeatureCount;
  for (const auto* traj : trajectories) {
    if (traj->sensor.size() != traj->reference.size()) {
      throw ShapeError("training set: sensor/reference length mismatch");
    }
    for (std::size_t k = 0; k < traj->sensor.size(); ++k) {
      const auto x = std.apply(traj->sensor[k]);
      set.features.insert(set.features.end(), x.begin(), x.end());
      set.prior.push_back(
          vehicle::kinematic_sideslip(traj->sensor[k].steer, params));
      set.target.push_back(traj->reference[k].sideslip);
      set.count += 1;
    }
  }
  return set;
}

}  // namespace sideslip::hybrid
