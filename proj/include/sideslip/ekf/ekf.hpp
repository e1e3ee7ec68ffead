#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "sideslip/sim/simulator.hpp"
#include "sideslip/vehicle/vehicle.hpp"

namespace sideslip::ekf {

/// Filter state over x = [vx, vy, yaw_rate] with its covariance and the
/// noise matrices. The covariance is re-symmetrized after every step and vx
/// is clamped at the minimum modeled speed.
struct EkfState {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d process_noise = Eigen::Matrix3d::Zero();   // [SI^2 / s]
  Eigen::Matrix4d measurement_noise = Eigen::Matrix4d::Zero();

  double vx() const { return mean(0); }
  double vy() const { return mean(1); }
  double yaw_rate() const { return mean(2); }
};

struct EkfConfig {
  Eigen::Matrix3d process_noise;
  Eigen::Matrix4d measurement_noise;
  Eigen::Matrix3d initial_covariance;
  vehicle::TireModel tire = vehicle::TireModel::Linear;

  static EkfConfig defaults();
};

/// Measurement vector [ax, ay, yaw_rate, vx_wheel].
using Measurement = Eigen::Vector4d;

/// Discrete step map of the velocity subsystem: one RK4 step of the
/// single-track model restricted to (vx, vy, yaw_rate).
Eigen::Vector3d velocity_step(const Eigen::Vector3d& x, double steer,
                              double fx, double dt,
                              const vehicle::VehicleParams& params,
                              vehicle::TireModel tire);

/// Jacobian of velocity_step by central finite differences.
Eigen::Matrix3d velocity_step_jacobian(const Eigen::Vector3d& x, double steer,
                                       double fx, double dt,
                                       const vehicle::VehicleParams& params,
                                       vehicle::TireModel tire);

/// Model-predicted measurement [ax, ay, yaw_rate, vx].
Eigen::Vector4d measurement_model(const Eigen::Vector3d& x, double steer,
                                  double fx,
                                  const vehicle::VehicleParams& params,
                                  vehicle::TireModel tire);

/// Propagates mean and covariance one step; P <- F P F^T + Q dt.
void ekf_predict(EkfState& state, double steer, double fx, double dt,
                 const vehicle::VehicleParams& params,
                 vehicle::TireModel tire);

/// Standard correction with Joseph-form covariance update; throws
/// NumericalError (state unchanged) when the innovation covariance cannot be
/// inverted. Returns the innovation for diagnostics.
Eigen::Vector4d ekf_update(EkfState& state, const Measurement& z, double steer,
                           double fx, const vehicle::VehicleParams& params,
                           vehicle::TireModel tire);

/// atan2(vy, vx) of the state estimate; requires vx >= minimum speed.
double ekf_sideslip(const EkfState& state);

/// Runs the filter over a 50 Hz log: per frame, predict with the measured
/// steering and fx = mass * ax, then update with [ax, ay, yaw_rate, mean
/// rear wheel speed * wheel radius]. Frames below the minimum speed yield
/// NaN (invalid marker) and leave the filter state held.
std::vector<double> run_ekf(std::span<const sim::SensorFrame> log,
                            const vehicle::VehicleParams& params,
                            const EkfConfig& config);

}  // namespace sideslip::ekf
