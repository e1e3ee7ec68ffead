#include <doctest.h>

#include <cmath>

#include "sideslip/hybrid/hybrid.hpp"
#include "sideslip/rng.hpp"

using namespace sideslip;
using namespace sideslip::hybrid;

namespace {

sim::SensorFrame frame_at(double t, Rng& rng) {
  sim::SensorFrame f{};
  f.t = t;
  f.accel_x = rng.uniform(-2, 2);
  f.accel_y = rng.uniform(-5, 5);
  f.yaw_rate = rng.uniform(-0.5, 0.5);
  f.wheel_fl = rng.uniform(20, 60);
  f.wheel_fr = rng.uniform(20, 60);
  f.wheel_rl = rng.uniform(20, 60);
  f.wheel_rr = rng.uniform(20, 60);
  f.steer = rng.uniform(-0.3, 0.3);
  return f;
}

}  // namespace

TEST_CASE("standardizer statistics") {
  SUBCASE("two-frame hand example") {
    std::vector<sim::SensorFrame> frames(2);
    Rng rng(1);
    frames[0] = frame_at(0.0, rng);
    frames[1] = frame_at(0.02, rng);
    frames[0].accel_x = 0.0;
    frames[1].accel_x = 2.0;
    const Standardizer s = fit_standardizer(frames);
    CHECK(s.mean[0] == doctest::Approx(1.0));
    CHECK(s.stddev[0] == doctest::Approx(1.0));  // population std
  }

  SUBCASE("standardized training set has zero mean and unit std") {
    Rng rng(2);
    std::vector<sim::SensorFrame> frames;
    for (int i = 0; i < 500; ++i) frames.push_back(frame_at(0.02 * i, rng));
    const Standardizer s = fit_standardizer(frames);
    std::array<double, kFeatureCount> mean{}, var{};
    for (const auto& f : frames) {
      const auto x = s.apply(f);
      for (std::size_t c = 0; c < kFeatureCount; ++c) mean[c] += x[c];
    }
    for (auto& m : mean) m /= static_cast<double>(frames.size());
    for (const auto& f : frames) {
      const auto x = s.apply(f);
      for (std::size_t c = 0; c < kFeatureCount; ++c) {
        var[c] += (x[c] - mean[c]) * (x[c] - mean[c]);
      }
    }
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      CHECK(std::fabs(mean[c]) < 1e-9);
      CHECK(std::fabs(std::sqrt(var[c] / frames.size()) - 1.0) < 1e-9);
    }
  }

  SUBCASE("constant channel is rejected by name") {
    Rng rng(3);
    std::vector<sim::SensorFrame> frames;
    for (int i = 0; i < 10; ++i) {
      auto f = frame_at(0.02 * i, rng);
      f.yaw_rate = 0.123;
      frames.push_back(f);
    }
    try {
      fit_standardizer(frames);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("yaw_rate") != std::string::npos);
    }
  }

  SUBCASE("too few frames") {
    std::vector<sim::SensorFrame> frames(1);
    CHECK_THROWS_AS(fit_standardizer(frames), ConfigError);
  }
}

TEST_CASE("estimate feeds the prior at the stage-2 concat point") {
  const auto params = vehicle::VehicleParams::default_sedan();
  const mlp::MlpTopology topo = mlp::MlpTopology::standard();

  // Wire the network so the output depends only on the prior column.
  mlp::MlpWeights w = mlp::zero_weights(topo);
  auto& stage2_first = w.layers[4];
  stage2_first.w[0 * 129 + 128] = 1.0;  // row 0 reads the prior input
  w.layers[5].w[0 * 32 + 0] = 1.0;
  w.layers[6].w[0 * 16 + 0] = 1.0;

  Standardizer s;
  s.mean.fill(0.0);
  s.stddev.fill(1.0);

  Rng rng(4);
  sim::SensorFrame f = frame_at(0.0, rng);
  f.steer = 0.0;
  CHECK(estimate(w, topo, s, f, params) == 0.0);

  f.steer = 0.1;
  const double prior = vehicle::kinematic_sideslip(0.1, params);
  CHECK(estimate(w, topo, s, f, params) ==
        doctest::Approx(std::tanh(std::tanh(prior))).epsilon(1e-12));

  // Pure function: repeated evaluation gives the identical value.
  CHECK(estimate(w, topo, s, f, params) == estimate(w, topo, s, f, params));
}

TEST_CASE("run_hybrid is the frame-wise map of estimate") {
  const auto params = vehicle::VehicleParams::default_sedan();
  const mlp::MlpTopology topo = mlp::MlpTopology::standard();
  const mlp::MlpWeights w = mlp::xavier_init(topo, 9);
  Standardizer s;
  s.mean.fill(0.1);
  s.stddev.fill(2.0);

  Rng rng(5);
  std::vector<sim::SensorFrame> log;
  for (int i = 0; i < 40; ++i) log.push_back(frame_at(0.02 * i, rng));

  const auto beta = run_hybrid(log, w, topo, s, params);
  REQUIRE(beta.size() == log.size());
  for (std::size_t k = 0; k < log.size(); ++k) {
    CHECK(beta[k] == estimate(w, topo, s, log[k], params));
  }

  // Permuting two frames permutes the two outputs (statelessness).
  std::swap(log[3], log[17]);
  const auto permuted = run_hybrid(log, w, topo, s, params);
  CHECK(permuted[3] == beta[17]);
  CHECK(permuted[17] == beta[3]);
  CHECK(permuted[5] == beta[5]);
}

TEST_CASE("training set assembly") {
  const auto params = vehicle::VehicleParams::default_sedan();
  sim::ManeuverSpec m;
  m.kind = sim::ManeuverKind::Slalom;
  m.steer_amplitude = 0.04;
  m.steer_frequency = 0.5;
  m.target_speed = 12.0;
  m.duration = 2.0;
  const auto traj = simulate(m, params, sim::SensorNoiseSpec::defaults(6));

  const Standardizer s = fit_standardizer(traj.sensor);
  const sim::Trajectory* ptr = &traj;
  const auto set = make_training_set(std::span(&ptr, 1), s, params);
  CHECK(set.count == traj.sensor.size());
  CHECK(set.feature_dim == kFeatureCount);
  CHECK(set.features.size() == set.count * kFeatureCount);
  // The prior comes from the measured steering, the target from the
  // reference side-slip.
  const std::size_t k = 37;
  CHECK(set.prior[k] ==
        vehicle::kinematic_sideslip(traj.sensor[k].steer, params));
  CHECK(set.target[k] == traj.reference[k].sideslip);
}
