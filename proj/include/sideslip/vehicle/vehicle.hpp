#pragma once

#include <cmath>
#include <utility>

#include "sideslip/common.hpp"

namespace sideslip::vehicle {

/// Coefficients of the magic-formula lateral force curve.
struct PacejkaCoeffs {
  double stiffness_b;  // [1/rad]
  double shape_c;      // [-], > 1
  double peak_d;       // [N]
  double curvature_e;  // [-]

  void validate(const char* which) const;
};

/// Physical constants of the simulated vehicle. Lengths in meters, mass in
/// kg, inertia in kg m^2, cornering stiffnesses in N/rad.
struct VehicleParams {
  double mass;
  double cog_to_front;
  double cog_to_rear;
  double track_width;
  double yaw_inertia;
  double cornering_stiffness_front;
  double cornering_stiffness_rear;
  PacejkaCoeffs pacejka_front;
  PacejkaCoeffs pacejka_rear;
  double wheel_radius;

  double wheelbase() const { return cog_to_front + cog_to_rear; }
  double front_axle_load() const {
    return mass * kGravity * cog_to_rear / wheelbase();
  }
  double rear_axle_load() const {
    return mass * kGravity * cog_to_front / wheelbase();
  }

  void validate() const;

  /// Default mid-size sedan used by the synthetic benchmark.
  static VehicleParams default_sedan();
};

/// Planar rigid-body state. Yaw is kept in (-pi, pi]; velocities are
/// expressed in the body frame.
struct VehicleState {
  double pos_x = 0.0;
  double pos_y = 0.0;
  double yaw = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double yaw_rate = 0.0;

  /// atan2(vy, vx); only defined at or above kMinLongitudinalSpeed.
  double sideslip() const;
};

struct StateDerivative {
  double dpos_x, dpos_y, dyaw, dvx, dvy, dyaw_rate;
};

enum class TireModel { Linear, Pacejka };

/// Geometric side-slip angle of the single-track model:
/// atan(l_r * tan(delta) / (l_f + l_r)). Odd and monotone in delta.
double kinematic_sideslip(double steer_angle, const VehicleParams& params);

/// Linear tire: lateral force opposing the slip angle, F = -C * alpha.
double linear_tire_lateral_force(double slip_angle, double stiffness);

/// Magic-formula tire with the same sign convention as the linear model
/// (force opposes slip angle); |F| <= D and F ~ -BCD * alpha near zero.
double pacejka_lateral_force(double slip_angle, const PacejkaCoeffs& coeffs);

/// Front/rear slip angles of the current state. Positive slip means the
/// contact-patch velocity points left of the wheel heading.
struct SlipAngles {
  double front, rear;
};
SlipAngles slip_angles(const VehicleState& s, double steer_angle,
                       const VehicleParams& params);

/// Single-track rigid-body dynamics with the longitudinal force applied at
/// the rear axle. Throws LowSpeedError below kMinLongitudinalSpeed.
StateDerivative dynamic_bicycle_derivative(const VehicleState& s,
                                           double steer_angle, double fx_total,
                                           const VehicleParams& params,
                                           TireModel tire);

/// Body-frame specific accelerations as an accelerometer would report them
/// on flat ground: ax = dvx - r*vy, ay = dvy + r*vx.
struct BodyAccel {
  double ax, ay;
};
BodyAccel body_acceleration(const VehicleState& s, const StateDerivative& d);

/// Classical fourth-order Runge-Kutta advance with steering and longitudinal
/// force held constant over the step. Yaw is re-wrapped to (-pi, pi].
VehicleState rk4_step(const VehicleState& s, double steer_angle,
                      double fx_total, double dt, const VehicleParams& params,
                      TireModel tire);

/// Same integrator with time-varying inputs, sampled at the RK4 stage times.
/// `inputs(t)` returns {steer_angle, fx_total}.
template <class InputFn>
VehicleState rk4_step_with(const VehicleState& s, double t0, double dt,
                           InputFn&& inputs, const VehicleParams& params,
                           TireModel tire) {
  auto eval = [&](const VehicleState& x, double t) {
    auto [steer, fx] = inputs(t);
    return dynamic_bicycle_derivative(x, steer, fx, params, tire);
  };
  auto advance = [](const VehicleState& x, const StateDerivative& d,
                    double h) {
    VehicleState out = x;
    out.pos_x += h * d.dpos_x;
    out.pos_y += h * d.dpos_y;
    out.yaw += h * d.dyaw;
    out.vx += h * d.dvx;
    out.vy += h * d.dvy;
    out.yaw_rate += h * d.dyaw_rate;
    return out;
  };
  const StateDerivative k1 = eval(s, t0);
  const StateDerivative k2 = eval(advance(s, k1, 0.5 * dt), t0 + 0.5 * dt);
  const StateDerivative k3 = eval(advance(s, k2, 0.5 * dt), t0 + 0.5 * dt);
  const StateDerivative k4 = eval(advance(s, k3, dt), t0 + dt);

  VehicleState out = s;
  const double w = dt / 6.0;
  out.pos_x += w * (k1.dpos_x + 2.0 * k2.dpos_x + 2.0 * k3.dpos_x + k4.dpos_x);
  out.pos_y += w * (k1.dpos_y + 2.0 * k2.dpos_y + 2.0 * k3.dpos_y + k4.dpos_y);
  out.yaw += w * (k1.dyaw + 2.0 * k2.dyaw + 2.0 * k3.dyaw + k4.dyaw);
  out.vx += w * (k1.dvx + 2.0 * k2.dvx + 2.0 * k3.dvx + k4.dvx);
  out.vy += w * (k1.dvy + 2.0 * k2.dvy + 2.0 * k3.dvy + k4.dvy);
  out.yaw_rate +=
      w * (k1.dyaw_rate + 2.0 * k2.dyaw_rate + 2.0 * k3.dyaw_rate +
           k4.dyaw_rate);
  out.yaw = wrap_angle(out.yaw);
  return out;
}

}  // namespace sideslip::vehicle
