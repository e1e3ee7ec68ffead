#include "sideslip/sim/suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sideslip/rng.hpp"

namespace sideslip::sim {

double peak_lateral_g(const Trajectory& traj) {
  double peak = 0.0;
  for (const auto& f : traj.sensor) {
    peak = std::max(peak, std::fabs(f.accel_y));
  }
  return peak / kGravity;
}

double calibrate_steer_amplitude(ManeuverSpec maneuver,
                                 const vehicle::VehicleParams& params,
                                 double target_g, double tol_g) {
  const SensorNoiseSpec quiet = SensorNoiseSpec::noiseless(0);
  auto peak_at = [&](double amplitude) {
    maneuver.steer_amplitude = amplitude;
    return peak_lateral_g(simulate(maneuver, params, quiet));
  };

  // Grow the bracket until the target is enclosed.
  double lo = 0.0, hi = 0.02;
  double peak_hi = peak_at(hi);
  while (peak_hi < target_g) {
    lo = hi;
    hi *= 2.0;
    if (hi > 0.6) {
      throw ConfigError("maneuver infeasible: target lateral acceleration "
                        "not reachable within the steering domain");
    }
    peak_hi = peak_at(hi);
  }
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double peak = peak_at(mid);
    if (std::fabs(peak - target_g) <= tol_g) return mid;
    (peak < target_g ? lo : hi) = mid;
  }
  throw ConfigError("maneuver infeasible: amplitude calibration did not "
                    "converge");
}

namespace {

std::string entry_name(const char* prefix, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%02zu", prefix, i);
  return buf;
}

std::vector<SpeedPoint> city_speed_profile(Rng& rng, double duration) {
  std::vector<SpeedPoint> profile;
  double t = 0.0;
  double v = rng.uniform(8.0, 14.0);
  profile.push_back({t, v});
  while (t < duration) {
    t += rng.uniform(8.0, 16.0);
    v = std::clamp(v + rng.uniform(-3.0, 3.0), 6.0, 16.0);
    profile.push_back({t, v});
  }
  return profile;
}

}  // namespace

std::vector<SuiteEntry> build_suite(SuiteKind kind, std::uint64_t seed,
                                    const vehicle::VehicleParams& params,
                                    const SuiteConfig& config) {
  std::vector<SuiteEntry> entries;

  auto noise_for = [&](const std::string& name) {
    SensorNoiseSpec n =
        SensorNoiseSpec::defaults(derive_seed(seed, "simulate/" + name));
    n.sigma_accel_x *= config.noise_scale;
    n.sigma_accel_y *= config.noise_scale;
    n.sigma_yaw_rate *= config.noise_scale;
    n.sigma_wheel_speed *= config.noise_scale;
    n.sigma_steer *= config.noise_scale;
    return n;
  };

  auto add_calibrated = [&](const std::string& name, ManeuverSpec spec,
                            double target_g) {
    spec.duration = config.duration;
    spec.steer_amplitude =
        calibrate_steer_amplitude(spec, params, target_g);
    entries.push_back({name, spec, noise_for(name), target_g});
  };

  const bool want_normal =
      kind == SuiteKind::Benchmark || kind == SuiteKind::Normal;
  const bool want_harsh =
      kind == SuiteKind::Benchmark || kind == SuiteKind::Harsh;

  if (want_normal) {
    Rng rng(derive_seed(seed, "suite/normal"));
    for (std::size_t i = 0; i < 20; ++i) {
      ManeuverSpec m;
      m.kind = ManeuverKind::CityProfile;
      m.steer_frequency = rng.uniform(0.15, 0.30);
      m.speed_profile = city_speed_profile(rng, config.duration);
      const double target = rng.uniform(0.08, 0.40);
      add_calibrated(entry_name("normal_city", i), m, target);
    }
    for (std::size_t i = 0; i < 14; ++i) {
      ManeuverSpec m;
      m.kind = ManeuverKind::Slalom;
      m.steer_frequency = rng.uniform(0.20, 0.50);
      m.target_speed = rng.uniform(10.0, 18.0);
      add_calibrated(entry_name("normal_slalom", i), m,
                     rng.uniform(0.10, 0.42));
    }
    for (std::size_t i = 0; i < 14; ++i) {
      ManeuverSpec m;
      m.kind = ManeuverKind::StepSteer;
      m.target_speed = rng.uniform(10.0, 18.0);
      add_calibrated(entry_name("normal_step", i), m,
                     rng.uniform(0.10, 0.42));
    }
  }

  if (want_harsh) {
    Rng rng(derive_seed(seed, "suite/harsh"));
    {
      // Harsh-regime exemplar pinned at 0.85 g.
      ManeuverSpec m;
      m.kind = ManeuverKind::Slalom;
      m.steer_frequency = 0.40;
      m.target_speed = 18.0;
      add_calibrated("harsh_slalom_peak", m, 0.85);
    }
    for (std::size_t i = 0; i < 7; ++i) {
      ManeuverSpec m;
      m.kind = ManeuverKind::Slalom;
      m.steer_frequency = rng.uniform(0.30, 0.60);
      m.target_speed = rng.uniform(14.0, 22.0);
      add_calibrated(entry_name("harsh_slalom", i), m,
                     rng.uniform(0.55, 0.88));
    }
    for (std::size_t i = 0; i < 4; ++i) {
      ManeuverSpec m;
      m.kind = ManeuverKind::StepSteer;
      m.target_speed = rng.uniform(14.0, 20.0);
      add_calibrated(entry_name("harsh_step", i), m,
                     rng.uniform(0.55, 0.80));
    }
  }

  return entries;
}

}  // namespace sideslip::sim
