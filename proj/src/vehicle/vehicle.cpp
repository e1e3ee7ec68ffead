#include "sideslip/vehicle/vehicle.hpp"

#include <cmath>
#include <string>

namespace sideslip::vehicle {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) {
    throw ConfigError(std::string("vehicle params: ") + name +
                      " must be strictly positive");
  }
}

}  // namespace

void PacejkaCoeffs::validate(const char* which) const {
  const std::string prefix = std::string("pacejka ") + which + ": ";
  if (!(stiffness_b > 0.0)) throw ConfigError(prefix + "B must be > 0");
  if (!(shape_c > 1.0)) throw ConfigError(prefix + "C must be > 1");
  if (!(peak_d > 0.0)) throw ConfigError(prefix + "D must be > 0");
  if (!std::isfinite(curvature_e)) throw ConfigError(prefix + "E not finite");
}

void VehicleParams::validate() const {
  require_positive(mass, "mass");
  require_positive(cog_to_front, "cog_to_front");
  require_positive(cog_to_rear, "cog_to_rear");
  require_positive(track_width, "track_width");
  require_positive(yaw_inertia, "yaw_inertia");
  require_positive(cornering_stiffness_front, "cornering_stiffness_front");
  require_positive(cornering_stiffness_rear, "cornering_stiffness_rear");
  require_positive(wheel_radius, "wheel_radius");
  if (!(wheelbase() > 0.0)) throw ConfigError("vehicle params: zero wheelbase");
  pacejka_front.validate("front");
  pacejka_rear.validate("rear");
}

VehicleParams VehicleParams::default_sedan() {
  VehicleParams p{};
  p.mass = 1578.0;
  p.cog_to_front = 1.134;
  p.cog_to_rear = 1.578;
  p.track_width = 1.513;
  p.yaw_inertia = 2924.0;
  p.cornering_stiffness_front = 80000.0;
  p.cornering_stiffness_rear = 80000.0;
  p.wheel_radius = 0.316;
  // Peak force D = mu * static axle load with mu = 1.
  p.pacejka_front = {10.0, 1.9, p.front_axle_load(), 0.97};
  p.pacejka_rear = {10.0, 1.9, p.rear_axle_load(), 0.97};
  return p;
}

double VehicleState::sideslip() const {
  if (vx < kMinLongitudinalSpeed) {
    throw LowSpeedError("sideslip undefined below minimum speed");
  }
  return std::atan2(vy, vx);
}

double kinematic_sideslip(double steer_angle, const VehicleParams& params) {
  if (!(std::fabs(steer_angle) < M_PI / 2.0)) {
    throw DomainError("kinematic_sideslip: |steer angle| must be < pi/2");
  }
  return std::atan(params.cog_to_rear * std::tan(steer_angle) /
                   params.wheelbase());
}

double linear_tire_lateral_force(double slip_angle, double stiffness) {
  return -stiffness * slip_angle;
}

double pacejka_lateral_force(double slip_angle, const PacejkaCoeffs& c) {
  const double ba = c.stiffness_b * slip_angle;
  const double inner = ba - c.curvature_e * (ba - std::atan(ba));
  return -c.peak_d * std::sin(c.shape_c * std::atan(inner));
}

SlipAngles slip_angles(const VehicleState& s, double steer_angle,
                       const VehicleParams& params) {
  if (s.vx < kMinLongitudinalSpeed) {
    throw LowSpeedError("slip angles undefined below minimum speed");
  }
  // Velocity angle at the axle minus the wheel heading; with the
  // force-opposes-slip tire convention this yields restoring forces.
  const double front =
      std::atan((s.vy + params.cog_to_front * s.yaw_rate) / s.vx) -
      steer_angle;
  const double rear =
      std::atan((s.vy - params.cog_to_rear * s.yaw_rate) / s.vx);
  return {front, rear};
}

StateDerivative dynamic_bicycle_derivative(const VehicleState& s,
                                           double steer_angle, double fx_total,
                                           const VehicleParams& params,
                                           TireModel tire) {
  const SlipAngles alpha = slip_angles(s, steer_angle, params);
  double fyf, fyr;
  if (tire == TireModel::Linear) {
    fyf = linear_tire_lateral_force(alpha.front,
                                    params.cornering_stiffness_front);
    fyr = linear_tire_lateral_force(alpha.rear,
                                    params.cornering_stiffness_rear);
  } else {
    fyf = pacejka_lateral_force(alpha.front, params.pacejka_front);
    fyr = pacejka_lateral_force(alpha.rear, params.pacejka_rear);
  }

  const double cos_d = std::cos(steer_angle);
  const double sin_d = std::sin(steer_angle);

  StateDerivative d{};
  d.dpos_x = s.vx * std::cos(s.yaw) - s.vy * std::sin(s.yaw);
  d.dpos_y = s.vx * std::sin(s.yaw) + s.vy * std::cos(s.yaw);
  d.dyaw = s.yaw_rate;
  d.dvx = s.yaw_rate * s.vy + (fx_total - fyf * sin_d) / params.mass;
  d.dvy = -s.yaw_rate * s.vx + (fyf * cos_d + fyr) / params.mass;
  d.dyaw_rate = (params.cog_to_front * fyf * cos_d -
                 params.cog_to_rear * fyr) /
                params.yaw_inertia;
  return d;
}

BodyAccel body_acceleration(const VehicleState& s, const StateDerivative& d) {
  return {d.dvx - s.yaw_rate * s.vy, d.dvy + s.yaw_rate * s.vx};
}

VehicleState rk4_step(const VehicleState& s, double steer_angle,
                      double fx_total, double dt, const VehicleParams& params,
                      TireModel tire) {
  return rk4_step_with(
      s, 0.0, dt,
      [&](double) { return std::pair<double, double>{steer_angle, fx_total}; },
      params, tire);
}

}  // namespace sideslip::vehicle
