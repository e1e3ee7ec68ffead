#pragma once

#include <array>
#include <string>

#include "sideslip/common.hpp"
#include "sideslip/sim/simulator.hpp"

namespace sideslip::io {

class MalformedHeaderError : public SchemaError {
 public:
  explicit MalformedHeaderError(const std::string& msg) : SchemaError(msg) {}
};
class RowArityError : public SchemaError {
 public:
  explicit RowArityError(const std::string& msg) : SchemaError(msg) {}
};
class NonMonotoneTimeError : public SchemaError {
 public:
  explicit NonMonotoneTimeError(const std::string& msg) : SchemaError(msg) {}
};

/// Column order of the trajectory log schema (SI units, radians).
inline constexpr std::array<const char*, 20> kTrajectoryColumns = {
    "t",        "ax",       "ay",        "yaw_rate",      "w_fl",
    "w_fr",     "w_rl",     "w_rr",      "delta",         "beta_ref",
    "vx_ref",   "vy_ref",   "psi_ref",   "x_ref",         "y_ref",
    "theta_ref", "phi_ref", "psi_rate_ref", "theta_rate_ref",
    "phi_rate_ref"};

/// Writes the aligned sensor/reference streams as one CSV. Values use
/// shortest round-trip formatting, so read_trajectory(write_trajectory(x))
/// reproduces every double bit for bit.
void write_trajectory(const std::string& path, const sim::Trajectory& traj);

/// Strict reader: the header must match the schema exactly, every row needs
/// all 20 fields, and t must be strictly increasing.
sim::Trajectory read_trajectory(const std::string& path);

}  // namespace sideslip::io
