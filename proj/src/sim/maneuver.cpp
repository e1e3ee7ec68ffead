#include "sideslip/sim/maneuver.hpp"

#include <algorithm>
#include <cmath>

namespace sideslip::sim {

const char* to_string(ManeuverKind k) {
  switch (k) {
    case ManeuverKind::StepSteer:
      return "step_steer";
    case ManeuverKind::Slalom:
      return "slalom";
    case ManeuverKind::CityProfile:
      return "city_profile";
    case ManeuverKind::RampSteer:
      return "ramp_steer";
  }
  return "unknown";
}

ManeuverKind maneuver_kind_from_string(const std::string& s) {
  if (s == "step_steer") return ManeuverKind::StepSteer;
  if (s == "slalom") return ManeuverKind::Slalom;
  if (s == "city_profile") return ManeuverKind::CityProfile;
  if (s == "ramp_steer") return ManeuverKind::RampSteer;
  throw ConfigError("unknown maneuver kind '" + s + "'");
}

void ManeuverSpec::validate() const {
  if (!(duration > 0.0)) throw ConfigError("maneuver: duration must be > 0");
  if (!(steer_frequency > 0.0)) {
    throw ConfigError("maneuver: steer_frequency must be > 0");
  }
  if (!(std::fabs(steer_amplitude) < M_PI / 2.0)) {
    throw ConfigError("maneuver: steer amplitude outside the steering domain");
  }
  if (target_speed_at(0.0) < kMinLongitudinalSpeed) {
    throw ConfigError("maneuver: initial target speed below minimum speed");
  }
  for (std::size_t i = 1; i < speed_profile.size(); ++i) {
    if (!(speed_profile[i].t > speed_profile[i - 1].t)) {
      throw ConfigError("maneuver: speed profile times must increase");
    }
  }
  for (const auto& p : speed_profile) {
    if (p.speed < kMinLongitudinalSpeed) {
      throw ConfigError("maneuver: speed profile below minimum speed");
    }
  }
}

double ManeuverSpec::steering_at(double t) const {
  const double a = steer_amplitude;
  const double w = 2.0 * M_PI * steer_frequency;
  switch (kind) {
    case ManeuverKind::StepSteer: {
      // Rate-limited step: ramp from t=1s over 0.5s, then hold.
      if (t <= 1.0) return 0.0;
      if (t >= 1.5) return a;
      return a * (t - 1.0) / 0.5;
    }
    case ManeuverKind::Slalom:
      return a * std::sin(w * t);
    case ManeuverKind::CityProfile:
      // Gentle multi-sine; component weights sum to one so |steer| <= a.
      return a * (0.55 * std::sin(w * t) +
                  0.30 * std::sin(0.31 * w * t + 1.7) +
                  0.15 * std::sin(2.6 * w * t + 0.9));
    case ManeuverKind::RampSteer:
      return a * std::clamp(t / duration, 0.0, 1.0);
  }
  return 0.0;
}

double ManeuverSpec::target_speed_at(double t) const {
  if (speed_profile.empty()) return target_speed;
  if (t <= speed_profile.front().t) return speed_profile.front().speed;
  if (t >= speed_profile.back().t) return speed_profile.back().speed;
  for (std::size_t i = 1; i < speed_profile.size(); ++i) {
    if (t <= speed_profile[i].t) {
      const auto& a = speed_profile[i - 1];
      const auto& b = speed_profile[i];
      const double u = (t - a.t) / (b.t - a.t);
      return a.speed + u * (b.speed - a.speed);
    }
  }
  return speed_profile.back().speed;
}

double ManeuverSpec::target_accel_at(double t) const {
  if (speed_profile.size() < 2) return 0.0;
  if (t < speed_profile.front().t || t >= speed_profile.back().t) return 0.0;
  for (std::size_t i = 1; i < speed_profile.size(); ++i) {
    if (t < speed_profile[i].t) {
      const auto& a = speed_profile[i - 1];
      const auto& b = speed_profile[i];
      return (b.speed - a.speed) / (b.t - a.t);
    }
  }
  return 0.0;
}

}  // namespace sideslip::sim
