#pragma once

#include <string>
#include <vector>

#include "sideslip/common.hpp"

namespace sideslip::sim {

enum class ManeuverKind { StepSteer, Slalom, CityProfile, RampSteer };

const char* to_string(ManeuverKind k);
ManeuverKind maneuver_kind_from_string(const std::string& s);

struct SpeedPoint {
  double t;      // [s]
  double speed;  // [m/s]
};

/// Open-loop steering program plus a target speed profile. The steering
/// signal is an analytic function of time so the plant integrates a smooth
/// input; the speed profile is tracked by the simulator's controller.
struct ManeuverSpec {
  ManeuverKind kind = ManeuverKind::StepSteer;
  double steer_amplitude = 0.0;   // [rad]
  double steer_frequency = 0.5;   // [Hz]
  double target_speed = 10.0;     // [m/s], used when speed_profile is empty
  std::vector<SpeedPoint> speed_profile;  // piecewise linear (t, speed)
  double duration = 10.0;         // [s]

  void validate() const;

  double steering_at(double t) const;
  double target_speed_at(double t) const;
  /// Slope of the speed profile, used as controller feed-forward.
  double target_accel_at(double t) const;
};

}  // namespace sideslip::sim
