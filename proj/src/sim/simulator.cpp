#include "sideslip/sim/simulator.hpp"

#include <cmath>

#include "sideslip/rng.hpp"

namespace sideslip::sim {

namespace {

// Proportional speed controller gain [1/s]; with the slope feed-forward this
// keeps the tracking error well under 2% on constant-speed segments.
constexpr double kSpeedGain = 1.5;

}  // namespace

void SensorNoiseSpec::validate() const {
  const double sigmas[] = {sigma_accel_x, sigma_accel_y, sigma_yaw_rate,
                           sigma_wheel_speed, sigma_steer};
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw ConfigError("noise: sigmas must be >= 0");
  }
}

WheelSpeeds wheel_speeds_from_state(const vehicle::VehicleState& s,
                                    double steer,
                                    const vehicle::VehicleParams& params) {
  if (s.vx < kMinLongitudinalSpeed) {
    throw LowSpeedError("wheel speeds undefined below minimum speed");
  }
  const double half_track = 0.5 * params.track_width;
  const double cos_d = std::cos(steer);
  const double sin_d = std::sin(steer);

  // Rigid-body velocity at a wheel center (x offset fore/aft, y offset
  // left/right): v = v_cog + yaw_rate x r.
  auto front = [&](double y_off) {
    const double vx_w = s.vx - s.yaw_rate * y_off;
    const double vy_w = s.vy + s.yaw_rate * params.cog_to_front;
    return (vx_w * cos_d + vy_w * sin_d) / params.wheel_radius;
  };
  auto rear = [&](double y_off) {
    const double vx_w = s.vx - s.yaw_rate * y_off;
    return vx_w / params.wheel_radius;
  };

  WheelSpeeds w{};
  w.fl = front(half_track);
  w.fr = front(-half_track);
  w.rl = rear(half_track);
  w.rr = rear(-half_track);
  return w;
}

Trajectory simulate(const ManeuverSpec& maneuver,
                    const vehicle::VehicleParams& params,
                    const SensorNoiseSpec& noise) {
  maneuver.validate();
  params.validate();
  noise.validate();

  const std::size_t n_frames =
      static_cast<std::size_t>(std::llround(maneuver.duration /
                                            kSamplePeriod)) + 1;

  vehicle::VehicleState state{};
  state.vx = maneuver.target_speed_at(0.0);

  Rng rng(noise.seed);

  Trajectory out;
  out.sensor.reserve(n_frames);
  out.reference.reserve(n_frames);

  for (std::size_t k = 0; k < n_frames; ++k) {
    const double t = static_cast<double>(k) * kSamplePeriod;
    const double steer = maneuver.steering_at(t);

    // Zero-order-hold longitudinal force command for the coming interval.
    const double fx =
        params.mass * (maneuver.target_accel_at(t) +
                       kSpeedGain * (maneuver.target_speed_at(t) - state.vx));

    const vehicle::StateDerivative deriv = vehicle::dynamic_bicycle_derivative(
        state, steer, fx, params, vehicle::TireModel::Pacejka);
    const vehicle::BodyAccel accel = vehicle::body_acceleration(state, deriv);
    const WheelSpeeds wheels = wheel_speeds_from_state(state, steer, params);

    ReferenceFrame ref{};
    ref.t = t;
    ref.pos_x = state.pos_x;
    ref.pos_y = state.pos_y;
    ref.vx = state.vx;
    ref.vy = state.vy;
    ref.yaw = state.yaw;
    ref.pitch = 0.0;
    ref.roll = 0.0;
    ref.yaw_rate = state.yaw_rate;
    ref.pitch_rate = 0.0;
    ref.roll_rate = 0.0;
    ref.sideslip = state.sideslip();
    out.reference.push_back(ref);

    // Noise draw order is fixed by the channel schema.
    SensorFrame sf{};
    sf.t = t;
    sf.accel_x = accel.ax + noise.bias_accel_x +
                 noise.sigma_accel_x * rng.normal();
    sf.accel_y = accel.ay + noise.bias_accel_y +
                 noise.sigma_accel_y * rng.normal();
    sf.yaw_rate = state.yaw_rate + noise.bias_yaw_rate +
                  noise.sigma_yaw_rate * rng.normal();
    sf.wheel_fl = wheels.fl + noise.bias_wheel_speed +
                  noise.sigma_wheel_speed * rng.normal();
    sf.wheel_fr = wheels.fr + noise.bias_wheel_speed +
                  noise.sigma_wheel_speed * rng.normal();
    sf.wheel_rl = wheels.rl + noise.bias_wheel_speed +
                  noise.sigma_wheel_speed * rng.normal();
    sf.wheel_rr = wheels.rr + noise.bias_wheel_speed +
                  noise.sigma_wheel_speed * rng.normal();
    sf.steer = steer + noise.bias_steer + noise.sigma_steer * rng.normal();
    out.sensor.push_back(sf);

    if (k + 1 < n_frames) {
      state = vehicle::rk4_step_with(
          state, t, kSamplePeriod,
          [&](double tau) {
            return std::pair<double, double>{maneuver.steering_at(tau), fx};
          },
          params, vehicle::TireModel::Pacejka);
      if (state.vx < kMinLongitudinalSpeed) {
        throw LowSpeedError("simulation aborted: speed fell below minimum");
      }
    }
  }
  return out;
}

}  // namespace sideslip::sim
