#include <doctest.h>

#include <cmath>
#include <cstring>

#include "sideslip/sim/histogram.hpp"
#include "sideslip/sim/simulator.hpp"
#include "sideslip/sim/split.hpp"
#include "sideslip/sim/suite.hpp"

using namespace sideslip;
using namespace sideslip::sim;

namespace {

ManeuverSpec slalom(double amplitude, double freq, double speed,
                    double duration) {
  ManeuverSpec m;
  m.kind = ManeuverKind::Slalom;
  m.steer_amplitude = amplitude;
  m.steer_frequency = freq;
  m.target_speed = speed;
  m.duration = duration;
  return m;
}

}  // namespace

TEST_CASE("zero-amplitude step steer stays at zero sideslip") {
  ManeuverSpec m;
  m.kind = ManeuverKind::StepSteer;
  m.steer_amplitude = 0.0;
  m.target_speed = 15.0;
  m.duration = 5.0;
  const auto traj = simulate(m, vehicle::VehicleParams::default_sedan(),
                             SensorNoiseSpec::noiseless(1));
  CHECK(traj.reference.size() == 251);  // duration/0.02 + 1
  CHECK(traj.sensor.size() == traj.reference.size());
  for (const auto& r : traj.reference) {
    CHECK(r.sideslip == 0.0);
    CHECK(r.vy == 0.0);
    CHECK(r.yaw_rate == 0.0);
  }
  for (const auto& s : traj.sensor) CHECK(s.accel_y == 0.0);
}

TEST_CASE("simulation is deterministic per seed") {
  const auto m = slalom(0.05, 0.4, 14.0, 3.0);
  const auto p = vehicle::VehicleParams::default_sedan();
  const auto n = SensorNoiseSpec::defaults(99);
  const auto a = simulate(m, p, n);
  const auto b = simulate(m, p, n);
  REQUIRE(a.sensor.size() == b.sensor.size());
  CHECK(std::memcmp(a.sensor.data(), b.sensor.data(),
                    a.sensor.size() * sizeof(SensorFrame)) == 0);
  CHECK(std::memcmp(a.reference.data(), b.reference.data(),
                    a.reference.size() * sizeof(ReferenceFrame)) == 0);

  auto n2 = n;
  n2.seed = 100;
  const auto c = simulate(m, p, n2);
  CHECK(std::memcmp(a.sensor.data(), c.sensor.data(),
                    a.sensor.size() * sizeof(SensorFrame)) != 0);
}

TEST_CASE("noise-free sensors equal the true quantities") {
  const auto m = slalom(0.04, 0.3, 12.0, 4.0);
  const auto p = vehicle::VehicleParams::default_sedan();
  const auto traj = simulate(m, p, SensorNoiseSpec::noiseless(5));
  for (std::size_t k = 0; k < traj.sensor.size(); ++k) {
    const auto& s = traj.sensor[k];
    const auto& r = traj.reference[k];
    CHECK(s.t == r.t);
    CHECK(s.steer == m.steering_at(s.t));
    CHECK(s.yaw_rate == r.yaw_rate);
    // Ground-truth side-slip is internally consistent.
    CHECK(r.sideslip == std::atan2(r.vy, r.vx));
    CHECK(r.pitch == 0.0);
    CHECK(r.roll == 0.0);
  }
}

TEST_CASE("speed controller tracks constant segments within 2%") {
  const auto m = slalom(0.02, 0.3, 16.0, 10.0);
  const auto traj = simulate(m, vehicle::VehicleParams::default_sedan(),
                             SensorNoiseSpec::noiseless(2));
  // Skip the initial transient.
  for (std::size_t k = traj.reference.size() / 2; k < traj.reference.size();
       ++k) {
    CHECK(std::fabs(traj.reference[k].vx - 16.0) / 16.0 < 0.02);
  }
}

TEST_CASE("maneuver that decays to minimum speed aborts") {
  ManeuverSpec m;
  m.kind = ManeuverKind::StepSteer;
  m.steer_amplitude = 0.0;
  m.duration = 20.0;
  m.speed_profile = {{0.0, 5.0}, {10.0, 1.0}};
  CHECK_THROWS_AS(simulate(m, vehicle::VehicleParams::default_sedan(),
                           SensorNoiseSpec::noiseless(3)),
                  LowSpeedError);
}

TEST_CASE("wheel speeds from rigid-body state") {
  const auto p = vehicle::VehicleParams::default_sedan();
  vehicle::VehicleState s{};
  s.vx = 10.0;

  SUBCASE("straight driving") {
    const WheelSpeeds w = wheel_speeds_from_state(s, 0.0, p);
    for (double v : {w.fl, w.fr, w.rl, w.rr}) {
      CHECK(v == doctest::Approx(31.645569620253165).epsilon(1e-14));
    }
  }

  SUBCASE("left turn spins the outer wheels faster") {
    s.yaw_rate = 0.3;
    s.vy = 0.2;
    const WheelSpeeds w = wheel_speeds_from_state(s, 0.05, p);
    CHECK(w.fr > w.fl);
    CHECK(w.rr > w.rl);
  }

  SUBCASE("no yaw and no steer makes front equal rear per side") {
    s.vy = 0.4;
    const WheelSpeeds w = wheel_speeds_from_state(s, 0.0, p);
    CHECK(w.fl == doctest::Approx(w.rl).epsilon(1e-15));
    CHECK(w.fr == doctest::Approx(w.rr).epsilon(1e-15));
  }

  SUBCASE("low speed raises") {
    s.vx = 0.3;
    CHECK_THROWS_AS(wheel_speeds_from_state(s, 0.0, p), LowSpeedError);
  }
}

TEST_CASE("friction circle histogram conserves counts") {
  std::vector<SensorFrame> frames(1);
  frames[0] = SensorFrame{};  // ax = ay = 0

  auto grid = friction_circle_histogram(frames, 11);
  CHECK(grid.total() == 1);
  CHECK(grid.at(5, 5) == 1);  // center cell of an odd grid

  // Conservation under any bin count, including out-of-range samples.
  frames.push_back({0.0, 25.0, -30.0, 0, 0, 0, 0, 0, 0});
  for (int bins : {1, 2, 7, 64}) {
    CHECK(friction_circle_histogram(frames, bins).total() == frames.size());
  }
  CHECK_THROWS_AS(friction_circle_histogram(frames, 0), ConfigError);

  CHECK(friction_circle_histogram({}, 8).total() == 0);
}

TEST_CASE("sideslip histogram") {
  std::vector<ReferenceFrame> frames(50);
  for (auto& f : frames) f = ReferenceFrame{};  // beta = 0
  auto h = sideslip_histogram(frames, 0.01);
  CHECK(h.counts.size() == 1);
  CHECK(h.total() == 50);

  frames[0].sideslip = 0.05;
  frames[1].sideslip = -0.031;
  h = sideslip_histogram(frames, 0.01);
  CHECK(h.total() == 50);

  CHECK(sideslip_histogram({}, 0.01).total() == 0);
}

TEST_CASE("symmetric slalom yields a near-symmetric sideslip distribution") {
  const auto traj = simulate(slalom(0.06, 0.4, 16.0, 30.0),
                             vehicle::VehicleParams::default_sedan(),
                             SensorNoiseSpec::noiseless(4));
  double mean = 0.0;
  for (const auto& r : traj.reference) mean += r.sideslip;
  mean /= static_cast<double>(traj.reference.size());
  double m2 = 0.0, m3 = 0.0;
  for (const auto& r : traj.reference) {
    const double d = r.sideslip - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(traj.reference.size());
  m3 /= static_cast<double>(traj.reference.size());
  const double skewness = m3 / std::pow(m2, 1.5);
  CHECK(std::fabs(skewness) < 0.2);
}

TEST_CASE("harsh slalom calibration hits the 0.8-0.9 g band") {
  const auto p = vehicle::VehicleParams::default_sedan();
  ManeuverSpec m = slalom(0.0, 0.4, 18.0, 20.0);
  m.steer_amplitude = calibrate_steer_amplitude(m, p, 0.85);
  const double peak = peak_lateral_g(simulate(m, p,
                                              SensorNoiseSpec::noiseless(0)));
  CHECK(peak >= 0.80);
  CHECK(peak <= 0.90);
}

TEST_CASE("ramp steer builds lateral acceleration monotonically") {
  ManeuverSpec m;
  m.kind = ManeuverKind::RampSteer;
  m.steer_amplitude = 0.04;
  m.target_speed = 14.0;
  m.duration = 8.0;
  const auto traj = simulate(m, vehicle::VehicleParams::default_sedan(),
                             SensorNoiseSpec::noiseless(8));
  // Steering ramps from zero to the amplitude across the maneuver.
  CHECK(traj.sensor.front().steer == 0.0);
  CHECK(traj.sensor.back().steer == doctest::Approx(0.04));
  for (std::size_t k = 1; k < traj.sensor.size(); ++k) {
    CHECK(traj.sensor[k].steer >= traj.sensor[k - 1].steer);
  }
  CHECK(std::fabs(traj.reference.back().sideslip) > 0.0);
}

TEST_CASE("straight driving concentrates the friction circle at the origin") {
  ManeuverSpec m;
  m.kind = ManeuverKind::StepSteer;
  m.steer_amplitude = 0.0;
  m.target_speed = 15.0;
  m.duration = 20.0;
  const auto noise = SensorNoiseSpec::defaults(12);
  const auto traj = simulate(m, vehicle::VehicleParams::default_sedan(),
                             noise);
  const auto grid = friction_circle_histogram(traj.sensor, 44);
  // All mass within a 6-sigma band around zero acceleration.
  const double band = 6.0 * noise.sigma_accel_y / kGravity;
  std::uint64_t inside = 0;
  for (int i = 0; i < grid.bins; ++i) {
    for (int j = 0; j < grid.bins; ++j) {
      if (grid.at(i, j) == 0) continue;
      if (std::fabs(grid.center(i)) <= band + 0.025 &&
          std::fabs(grid.center(j)) <= band + 0.025) {
        inside += grid.at(i, j);
      }
    }
  }
  CHECK(inside == grid.total());
}

TEST_CASE("stratified split") {
  std::vector<RegimeLabel> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(RegimeLabel::Normal);
  for (int i = 0; i < 10; ++i) labels.push_back(RegimeLabel::Dynamic);

  const auto split = split_dataset(labels, 0.8, 7);
  CHECK(split.train_indices.size() == 16);
  CHECK(split.test_indices.size() == 4);

  // Exactly 8+8 train and 2+2 test per label; partition of the input.
  std::size_t train_normal = 0, test_normal = 0;
  std::vector<bool> seen(labels.size(), false);
  for (auto i : split.train_indices) {
    CHECK(!seen[i]);
    seen[i] = true;
    if (labels[i] == RegimeLabel::Normal) ++train_normal;
  }
  for (auto i : split.test_indices) {
    CHECK(!seen[i]);
    seen[i] = true;
    if (labels[i] == RegimeLabel::Normal) ++test_normal;
  }
  CHECK(train_normal == 8);
  CHECK(test_normal == 2);
  for (bool s : seen) CHECK(s);

  // Deterministic per seed.
  const auto again = split_dataset(labels, 0.8, 7);
  CHECK(again.train_indices == split.train_indices);
  CHECK(again.test_indices == split.test_indices);

  // A present label with fewer than two members cannot be stratified.
  labels.assign(5, RegimeLabel::Normal);
  labels.push_back(RegimeLabel::Dynamic);
  CHECK_THROWS_AS(split_dataset(labels, 0.8, 7), StratificationError);

  // Single-label inputs are fine.
  labels.assign(5, RegimeLabel::Normal);
  const auto only_normal = split_dataset(labels, 0.8, 7);
  CHECK(only_normal.train_indices.size() == 4);
  CHECK(only_normal.test_indices.size() == 1);

  CHECK_THROWS_AS(split_dataset(labels, 1.0, 7), ConfigError);
}
