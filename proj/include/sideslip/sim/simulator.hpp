#pragma once

#include <cstdint>
#include <vector>

#include "sideslip/sim/maneuver.hpp"
#include "sideslip/vehicle/vehicle.hpp"

namespace sideslip::sim {

/// Additive Gaussian noise and bias per in-car sensor channel.
struct SensorNoiseSpec {
  double sigma_accel_x = 0.05;      // [m/s^2]
  double sigma_accel_y = 0.05;      // [m/s^2]
  double sigma_yaw_rate = 0.002;    // [rad/s]
  double sigma_wheel_speed = 0.05;  // [rad/s]
  double sigma_steer = 0.001;       // [rad]
  double bias_accel_x = 0.0;
  double bias_accel_y = 0.0;
  double bias_yaw_rate = 0.0;
  double bias_wheel_speed = 0.0;
  double bias_steer = 0.0;
  std::uint64_t seed = 0;

  void validate() const;

  static SensorNoiseSpec defaults(std::uint64_t seed_value) {
    SensorNoiseSpec n;
    n.seed = seed_value;
    return n;
  }
  static SensorNoiseSpec noiseless(std::uint64_t seed_value) {
    SensorNoiseSpec n;
    n.sigma_accel_x = n.sigma_accel_y = n.sigma_yaw_rate = 0.0;
    n.sigma_wheel_speed = n.sigma_steer = 0.0;
    n.seed = seed_value;
    return n;
  }
};

/// One 50 Hz sample of the in-car measurement channels.
struct SensorFrame {
  double t;
  double accel_x, accel_y;  // [m/s^2]
  double yaw_rate;          // [rad/s]
  double wheel_fl, wheel_fr, wheel_rl, wheel_rr;  // [rad/s]
  double steer;             // [rad]
};

/// One sample of the noise-free reference channels. Pitch/roll channels are
/// kept in the schema but are identically zero on the flat-road plant.
struct ReferenceFrame {
  double t;
  double pos_x, pos_y;    // [m]
  double vx, vy;          // [m/s]
  double yaw, pitch, roll;              // [rad]
  double yaw_rate, pitch_rate, roll_rate;  // [rad/s]
  double sideslip;        // [rad]
};

struct Trajectory {
  std::vector<SensorFrame> sensor;
  std::vector<ReferenceFrame> reference;
};

struct WheelSpeeds {
  double fl, fr, rl, rr;  // [rad/s]
};

/// Rotational speeds of the four wheels under zero longitudinal slip: the
/// rigid-body velocity at each wheel center projected on the wheel heading,
/// divided by the wheel radius. Front wheels are steered by `steer`.
WheelSpeeds wheel_speeds_from_state(const vehicle::VehicleState& s,
                                    double steer,
                                    const vehicle::VehicleParams& params);

/// Integrates the maneuver at 50 Hz with magic-formula tires as ground truth
/// and emits aligned noise-free reference frames and noisy sensor frames.
/// Both lists have duration/0.02 + 1 entries. Aborts with LowSpeedError if
/// the maneuver drives the vehicle below the minimum speed.
Trajectory simulate(const ManeuverSpec& maneuver,
                    const vehicle::VehicleParams& params,
                    const SensorNoiseSpec& noise);

}  // namespace sideslip::sim
