#include "sideslip/ekf/ekf.hpp"

#include <cmath>
#include <limits>

namespace sideslip::ekf {

namespace {

vehicle::VehicleState embed(const Eigen::Vector3d& x) {
  vehicle::VehicleState s{};
  s.vx = x(0);
  s.vy = x(1);
  s.yaw_rate = x(2);
  return s;
}

}  // namespace

EkfConfig EkfConfig::defaults() {
  EkfConfig c;
  c.process_noise = Eigen::Vector3d(0.05, 0.05, 0.01).asDiagonal();
  c.measurement_noise =
      Eigen::Vector4d(0.0025, 0.0025, 4e-6, 0.01).asDiagonal();
  c.initial_covariance = Eigen::Vector3d(0.25, 0.25, 0.01).asDiagonal();
  return c;
}

Eigen::Vector3d velocity_step(const Eigen::Vector3d& x, double steer,
                              double fx, double dt,
                              const vehicle::VehicleParams& params,
                              vehicle::TireModel tire) {
  const vehicle::VehicleState next =
      vehicle::rk4_step(embed(x), steer, fx, dt, params, tire);
  return {next.vx, next.vy, next.yaw_rate};
}

Eigen::Matrix3d velocity_step_jacobian(const Eigen::Vector3d& x, double steer,
                                       double fx, double dt,
                                       const vehicle::VehicleParams& params,
                                       vehicle::TireModel tire) {
  Eigen::Matrix3d jac;
  for (int j = 0; j < 3; ++j) {
    const double h = 1e-6 * std::max(1.0, std::fabs(x(j)));
    Eigen::Vector3d xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    jac.col(j) = (velocity_step(xp, steer, fx, dt, params, tire) -
                  velocity_step(xm, steer, fx, dt, params, tire)) /
                 (2.0 * h);
  }
  return jac;
}

Eigen::Vector4d measurement_model(const Eigen::Vector3d& x, double steer,
                                  double fx,
                                  const vehicle::VehicleParams& params,
                                  vehicle::TireModel tire) {
  const vehicle::VehicleState s = embed(x);
  const vehicle::StateDerivative d =
      vehicle::dynamic_bicycle_derivative(s, steer, fx, params, tire);
  const vehicle::BodyAccel a = vehicle::body_acceleration(s, d);
  return {a.ax, a.ay, x(2), x(0)};
}

void ekf_predict(EkfState& state, double steer, double fx, double dt,
                 const vehicle::VehicleParams& params,
                 vehicle::TireModel tire) {
  if (!(dt > 0.0)) throw ConfigError("ekf: dt must be > 0");
  const Eigen::Matrix3d jac =
      velocity_step_jacobian(state.mean, steer, fx, dt, params, tire);
  state.mean = velocity_step(state.mean, steer, fx, dt, params, tire);
  state.mean(0) = std::max(state.mean(0), kMinLongitudinalSpeed);
  state.covariance = jac * state.covariance * jac.transpose() +
                     state.process_noise * dt;
  state.covariance =
      0.5 * (state.covariance + state.covariance.transpose()).eval();
}

Eigen::Vector4d ekf_update(EkfState& state, const Measurement& z, double steer,
                           double fx, const vehicle::VehicleParams& params,
                           vehicle::TireModel tire) {
  // Measurement Jacobian by the same central-difference scheme as F.
  Eigen::Matrix<double, 4, 3> h_jac;
  for (int j = 0; j < 3; ++j) {
    const double h = 1e-6 * std::max(1.0, std::fabs(state.mean(j)));
    Eigen::Vector3d xp = state.mean, xm = state.mean;
    xp(j) += h;
    xm(j) -= h;
    h_jac.col(j) = (measurement_model(xp, steer, fx, params, tire) -
                    measurement_model(xm, steer, fx, params, tire)) /
                   (2.0 * h);
  }

  const Eigen::Vector4d innovation =
      z - measurement_model(state.mean, steer, fx, params, tire);
  const Eigen::Matrix4d s_mat =
      h_jac * state.covariance * h_jac.transpose() + state.measurement_noise;

  const Eigen::LDLT<Eigen::Matrix4d> ldlt(s_mat);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError("ekf: innovation covariance not decomposable");
  }
  // K = P H^T S^-1, via S^-1 (H P) since P is symmetric.
  const Eigen::Matrix<double, 3, 4> gain =
      ldlt.solve(h_jac * state.covariance).transpose();
  if (!gain.allFinite()) {
    throw NumericalError("ekf: singular innovation covariance");
  }

  state.mean += gain * innovation;
  state.mean(0) = std::max(state.mean(0), kMinLongitudinalSpeed);
  const Eigen::Matrix3d ikh =
      Eigen::Matrix3d::Identity() - gain * h_jac;
  state.covariance = ikh * state.covariance * ikh.transpose() +
                     gain * state.measurement_noise * gain.transpose();
  state.covariance =
      0.5 * (state.covariance + state.covariance.transpose()).eval();
  return innovation;
}

double ekf_sideslip(const EkfState& state) {
  if (state.vx() < kMinLongitudinalSpeed) {
    throw LowSpeedError("ekf: sideslip undefined below minimum speed");
  }
  return std::atan2(state.vy(), state.vx());
}

std::vector<double> run_ekf(std::span<const sim::SensorFrame> log,
                            const vehicle::VehicleParams& params,
                            const EkfConfig& config) {
  if (log.empty()) throw ConfigError("ekf: empty log");

  std::vector<double> beta;
  beta.reserve(log.size());

  auto wheel_vx = [&](const sim::SensorFrame& f) {
    return 0.5 * (f.wheel_rl + f.wheel_rr) * params.wheel_radius;
  };

  EkfState state;
  state.process_noise = config.process_noise;
  state.measurement_noise = config.measurement_noise;
  state.covariance = config.initial_covariance;
  state.mean = Eigen::Vector3d(
      std::max(wheel_vx(log.front()), kMinLongitudinalSpeed), 0.0,
      log.front().yaw_rate);

  bool first = true;
  for (const auto& frame : log) {
    const double vxw = wheel_vx(frame);
    if (vxw < kMinLongitudinalSpeed) {
      // Low-speed gap: hold the lateral estimate, flag the frame invalid.
      beta.push_back(std::numeric_limits<double>::quiet_NaN());
      first = true;
      continue;
    }
    const double fx = params.mass * frame.accel_x;
    if (!first) {
      ekf_predict(state, frame.steer, fx, kSamplePeriod, params, config.tire);
    }
    first = false;
    const Measurement z(frame.accel_x, frame.accel_y, frame.yaw_rate, vxw);
    ekf_update(state, z, frame.steer, fx, params, config.tire);
    beta.push_back(ekf_sideslip(state));
  }
  return beta;
}

}  // namespace sideslip::ekf
