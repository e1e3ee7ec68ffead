#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sideslip/sim/simulator.hpp"

namespace sideslip::sim {

enum class SuiteKind { Benchmark, Normal, Harsh };

struct SuiteEntry {
  std::string name;
  ManeuverSpec maneuver;
  SensorNoiseSpec noise;
  double target_peak_g = 0.0;  // calibration target, for the manifest
};

struct SuiteConfig {
  double duration = 60.0;     // [s] per trajectory
  double noise_scale = 1.0;   // multiplies the default sigmas
};

/// Largest |ay|/g of the noise-free trajectory.
double peak_lateral_g(const Trajectory& traj);

/// Finds the steering amplitude whose noise-free simulation reaches a peak
/// lateral acceleration of target_g (+- tol) by bisection; throws ConfigError
/// when the maneuver cannot reach the target inside the steering domain.
double calibrate_steer_amplitude(ManeuverSpec maneuver,
                                 const vehicle::VehicleParams& params,
                                 double target_g, double tol_g = 0.015);

/// Deterministic maneuver suite. The benchmark set holds 60 trajectories
/// biased ~4:1 toward normal driving; Normal/Harsh are its two subsets.
/// Amplitudes are calibrated so normal entries stay below 0.45 g and harsh
/// entries span 0.55-0.88 g, including one 0.85 g slalom exemplar.
std::vector<SuiteEntry> build_suite(SuiteKind kind, std::uint64_t seed,
                                    const vehicle::VehicleParams& params,
                                    const SuiteConfig& config = {});

}  // namespace sideslip::sim
