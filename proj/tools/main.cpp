// Command-line entry point: generate synthetic driving data, train the
// learned observer, evaluate observers against the reference, and run
// inference on a single log.
//
// Exit codes: 0 success, 2 usage/configuration, 3 data/schema, 4 numerical.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "sideslip/eval/eval.hpp"
#include "sideslip/hybrid/hybrid.hpp"
#include "sideslip/io/csv.hpp"
#include "sideslip/io/model_file.hpp"
#include "sideslip/io/trajectory_csv.hpp"
#include "sideslip/ekf/ekf.hpp"
#include "sideslip/kernels/kernels.hpp"
#include "sideslip/mlp/train.hpp"
#include "sideslip/rng.hpp"
#include "sideslip/sim/histogram.hpp"
#include "sideslip/sim/split.hpp"
#include "sideslip/sim/suite.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sideslip;

namespace {

json params_to_json(const vehicle::VehicleParams& p) {
  return json{{"mass", p.mass},
              {"cog_to_front", p.cog_to_front},
              {"cog_to_rear", p.cog_to_rear},
              {"track_width", p.track_width},
              {"yaw_inertia", p.yaw_inertia},
              {"cornering_stiffness_front", p.cornering_stiffness_front},
              {"cornering_stiffness_rear", p.cornering_stiffness_rear},
              {"wheel_radius", p.wheel_radius},
              {"pacejka_front",
               {{"b", p.pacejka_front.stiffness_b},
                {"c", p.pacejka_front.shape_c},
                {"d", p.pacejka_front.peak_d},
                {"e", p.pacejka_front.curvature_e}}},
              {"pacejka_rear",
               {{"b", p.pacejka_rear.stiffness_b},
                {"c", p.pacejka_rear.shape_c},
                {"d", p.pacejka_rear.peak_d},
                {"e", p.pacejka_rear.curvature_e}}}};
}

vehicle::VehicleParams params_from_json(const json& j) {
  vehicle::VehicleParams p{};
  p.mass = j.at("mass");
  p.cog_to_front = j.at("cog_to_front");
  p.cog_to_rear = j.at("cog_to_rear");
  p.track_width = j.at("track_width");
  p.yaw_inertia = j.at("yaw_inertia");
  p.cornering_stiffness_front = j.at("cornering_stiffness_front");
  p.cornering_stiffness_rear = j.at("cornering_stiffness_rear");
  p.wheel_radius = j.at("wheel_radius");
  const auto& f = j.at("pacejka_front");
  p.pacejka_front = {f.at("b"), f.at("c"), f.at("d"), f.at("e")};
  const auto& r = j.at("pacejka_rear");
  p.pacejka_rear = {r.at("b"), r.at("c"), r.at("d"), r.at("e")};
  return p;
}

json maneuver_to_json(const sim::ManeuverSpec& m) {
  json profile = json::array();
  for (const auto& pt : m.speed_profile) {
    profile.push_back({{"t", pt.t}, {"speed", pt.speed}});
  }
  return json{{"kind", sim::to_string(m.kind)},
              {"steer_amplitude", m.steer_amplitude},
              {"steer_frequency", m.steer_frequency},
              {"target_speed", m.target_speed},
              {"speed_profile", profile},
              {"duration", m.duration}};
}

json noise_to_json(const sim::SensorNoiseSpec& n) {
  return json{{"sigma_ax", n.sigma_accel_x},
              {"sigma_ay", n.sigma_accel_y},
              {"sigma_yaw_rate", n.sigma_yaw_rate},
              {"sigma_wheel_speed", n.sigma_wheel_speed},
              {"sigma_delta", n.sigma_steer},
              {"bias_ax", n.bias_accel_x},
              {"bias_ay", n.bias_accel_y},
              {"bias_yaw_rate", n.bias_yaw_rate},
              {"bias_wheel_speed", n.bias_wheel_speed},
              {"bias_delta", n.bias_steer},
              {"seed", n.seed}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

struct VehicleOverrides {
  double mass = -1, lf = -1, lr = -1, track = -1, inertia = -1;
  double cf = -1, cr = -1, wheel_radius = -1;

  vehicle::VehicleParams resolve() const {
    vehicle::VehicleParams p = vehicle::VehicleParams::default_sedan();
    if (mass > 0) p.mass = mass;
    if (lf > 0) p.cog_to_front = lf;
    if (lr > 0) p.cog_to_rear = lr;
    if (track > 0) p.track_width = track;
    if (inertia > 0) p.yaw_inertia = inertia;
    if (cf > 0) p.cornering_stiffness_front = cf;
    if (cr > 0) p.cornering_stiffness_rear = cr;
    if (wheel_radius > 0) p.wheel_radius = wheel_radius;
    // Peak tire force tracks the axle loads after geometry overrides.
    p.pacejka_front.peak_d = p.front_axle_load();
    p.pacejka_rear.peak_d = p.rear_axle_load();
    p.validate();
    return p;
  }

  void add_options(CLI::App* cmd) {
    cmd->add_option("--mass", mass, "vehicle mass [kg]");
    cmd->add_option("--lf", lf, "CoG to front axle [m]");
    cmd->add_option("--lr", lr, "CoG to rear axle [m]");
    cmd->add_option("--track", track, "track width [m]");
    cmd->add_option("--inertia", inertia, "yaw inertia [kg m^2]");
    cmd->add_option("--cf", cf, "front cornering stiffness [N/rad]");
    cmd->add_option("--cr", cr, "rear cornering stiffness [N/rad]");
    cmd->add_option("--wheel-radius", wheel_radius, "wheel radius [m]");
  }
};

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string suite = "benchmark";
  std::string out_dir;
  std::uint64_t seed = 42;
  double duration = 60.0;
  double noise_scale = 1.0;
  double split_ratio = 0.8;
  // custom maneuver
  std::string kind = "slalom";
  double amplitude = 0.05;
  double frequency = 0.4;
  double speed = 15.0;
  VehicleOverrides vehicle;
};

int cmd_simulate(const SimulateArgs& args) {
  const vehicle::VehicleParams params = args.vehicle.resolve();
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);

  std::vector<sim::SuiteEntry> entries;
  if (args.suite == "custom") {
    sim::SuiteEntry e;
    e.name = "custom_00";
    e.maneuver.kind = sim::maneuver_kind_from_string(args.kind);
    e.maneuver.steer_amplitude = args.amplitude;
    e.maneuver.steer_frequency = args.frequency;
    e.maneuver.target_speed = args.speed;
    e.maneuver.duration = args.duration;
    e.noise = sim::SensorNoiseSpec::defaults(
        derive_seed(args.seed, "simulate/custom_00"));
    entries.push_back(e);
  } else {
    sim::SuiteKind kind;
    if (args.suite == "benchmark") {
      kind = sim::SuiteKind::Benchmark;
    } else if (args.suite == "normal") {
      kind = sim::SuiteKind::Normal;
    } else if (args.suite == "harsh") {
      kind = sim::SuiteKind::Harsh;
    } else {
      throw ConfigError("unknown suite '" + args.suite + "'");
    }
    sim::SuiteConfig config;
    config.duration = args.duration;
    config.noise_scale = args.noise_scale;
    entries = sim::build_suite(kind, args.seed, params, config);
  }

  json manifest_entries = json::array();
  std::vector<sim::RegimeLabel> labels;
  std::vector<sim::Trajectory> trajectories;
  trajectories.reserve(entries.size());

  for (const auto& entry : entries) {
    sim::Trajectory traj = sim::simulate(entry.maneuver, params, entry.noise);
    const eval::ManeuverClass mc =
        eval::classify_maneuver(traj.reference, traj.sensor);
    const std::string file = entry.name + ".csv";
    io::write_trajectory((dir / file).string(), traj);
    write_json(dir / (entry.name + ".meta.json"),
               json{{"schema_version", 1},
                    {"name", entry.name},
                    {"maneuver", maneuver_to_json(entry.maneuver)},
                    {"noise", noise_to_json(entry.noise)},
                    {"params", params_to_json(params)},
                    {"label", sim::to_string(mc.label)},
                    {"max_ay_g", mc.max_lateral_g}});
    manifest_entries.push_back(json{{"name", entry.name},
                                    {"file", file},
                                    {"label", sim::to_string(mc.label)},
                                    {"max_ay_g", mc.max_lateral_g},
                                    {"target_peak_g", entry.target_peak_g}});
    labels.push_back(mc.label);
    trajectories.push_back(std::move(traj));
    std::cout << "simulated " << entry.name << "  peak |ay| = "
              << mc.max_lateral_g << " g  (" << sim::to_string(mc.label)
              << ")\n";
  }

  // Stratified trajectory-level split recorded in the manifest. A custom
  // single trajectory is marked test so it can be evaluated directly.
  if (args.suite == "custom") {
    manifest_entries[0]["split"] = "test";
  } else {
    const sim::SplitResult split = sim::split_dataset(
        labels, args.split_ratio, derive_seed(args.seed, "split"));
    for (auto i : split.train_indices) {
      manifest_entries[i]["split"] = "train";
    }
    for (auto i : split.test_indices) manifest_entries[i]["split"] = "test";
  }

  // Distribution views over the full suite.
  {
    std::vector<sim::SensorFrame> all_sensor;
    std::vector<sim::ReferenceFrame> all_ref;
    for (const auto& t : trajectories) {
      all_sensor.insert(all_sensor.end(), t.sensor.begin(), t.sensor.end());
      all_ref.insert(all_ref.end(), t.reference.begin(), t.reference.end());
    }
    const auto grid = sim::friction_circle_histogram(all_sensor, 44);
    std::ofstream out(dir / "friction_circle.csv", std::ios::binary);
    out << "ax_g,ay_g,count\n";
    for (int i = 0; i < grid.bins; ++i) {
      for (int j = 0; j < grid.bins; ++j) {
        out << io::format_double(grid.center(i)) << ','
            << io::format_double(grid.center(j)) << ',' << grid.at(i, j)
            << '\n';
      }
    }
    const auto hist = sim::sideslip_histogram(all_ref, 0.002);
    std::ofstream hout(dir / "sideslip_hist.csv", std::ios::binary);
    hout << "beta_rad,count\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
      hout << io::format_double(hist.bin_center(i)) << ',' << hist.counts[i]
           << '\n';
    }
  }

  write_json(dir / "suite.json", json{{"schema_version", 1},
                                      {"seed", args.seed},
                                      {"suite", args.suite},
                                      {"duration", args.duration},
                                      {"noise_scale", args.noise_scale},
                                      {"split_ratio", args.split_ratio},
                                      {"params", params_to_json(params)},
                                      {"entries", manifest_entries}});
  write_json(dir / "run_config_simulate.json",
             json{{"command", "simulate"},
                  {"suite", args.suite},
                  {"seed", args.seed},
                  {"duration", args.duration},
                  {"noise_scale", args.noise_scale},
                  {"split_ratio", args.split_ratio},
                  {"params", params_to_json(params)},
                  {"kernels", kernels::active().name}});
  std::cout << "wrote " << entries.size() << " trajectories to " << dir
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// shared manifest loading

struct LoadedSet {
  vehicle::VehicleParams params;
  std::vector<std::string> names;
  std::vector<sim::Trajectory> trajectories;
};

LoadedSet load_split(const fs::path& data_dir, const std::string& split) {
  const json manifest = read_json(data_dir / "suite.json");
  if (manifest.value("schema_version", 0) != 1) {
    throw SchemaError("suite.json: unsupported schema_version");
  }
  LoadedSet set;
  set.params = params_from_json(manifest.at("params"));
  for (const auto& entry : manifest.at("entries")) {
    if (entry.value("split", "") != split) continue;
    set.names.push_back(entry.at("name"));
    set.trajectories.push_back(io::read_trajectory(
        (data_dir / entry.at("file").get<std::string>()).string()));
  }
  if (set.trajectories.empty()) {
    throw SchemaError("no '" + split + "' trajectories in " +
                      data_dir.string());
  }
  return set;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data_dir;
  std::string out_model;
  std::uint64_t seed = 42;
  mlp::TrainConfig config;
  std::string concat = "stage2";
};

int cmd_train(const TrainArgs& args) {
  const LoadedSet data = load_split(args.data_dir, "train");

  std::vector<sim::SensorFrame> train_frames;
  for (const auto& t : data.trajectories) {
    train_frames.insert(train_frames.end(), t.sensor.begin(),
                        t.sensor.end());
  }
  // Standardizer statistics come from the training split only.
  const hybrid::Standardizer standardizer =
      hybrid::fit_standardizer(train_frames);

  std::vector<const sim::Trajectory*> ptrs;
  for (const auto& t : data.trajectories) ptrs.push_back(&t);
  const mlp::TrainingSet set =
      hybrid::make_training_set(ptrs, standardizer, data.params);

  mlp::TrainConfig config = args.config;
  config.seed = args.seed;
  const mlp::MlpTopology topology = mlp::MlpTopology::standard(
      hybrid::kFeatureCount, mlp::concat_point_from_string(args.concat));

  std::cout << "training on " << set.count << " samples from "
            << data.trajectories.size() << " trajectories\n";
  const mlp::TrainResult result = mlp::train(set, config, topology);
  std::cout << "epoch loss: first = " << result.epoch_loss.front()
            << ", last = " << result.epoch_loss.back() << "\n";

  io::ModelFile model;
  model.topology = topology;
  model.weights = result.weights;
  model.standardizer = standardizer;
  model.channel_order.assign(hybrid::kFeatureChannels.begin(),
                             hybrid::kFeatureChannels.end());
  model.train_config = config;
  model.params = data.params;
  model.train_fingerprint = io::fingerprint_training_set(set);

  const fs::path out(args.out_model);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  io::write_model(out.string(), model);

  {
    std::ofstream loss_csv(out.string() + ".loss.csv", std::ios::binary);
    loss_csv << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
      loss_csv << e << ',' << io::format_double(result.epoch_loss[e]) << '\n';
    }
  }
  write_json(out.has_parent_path()
                 ? out.parent_path() / "run_config_train.json"
                 : fs::path("run_config_train.json"),
             json{{"command", "train"},
                  {"data", args.data_dir},
                  {"out", args.out_model},
                  {"seed", args.seed},
                  {"concat_point", args.concat},
                  {"learning_rate", config.learning_rate},
                  {"adam_beta1", config.adam_beta1},
                  {"adam_beta2", config.adam_beta2},
                  {"adam_eps", config.adam_eps},
                  {"l2_rate", config.l2_rate},
                  {"batch_size", config.batch_size},
                  {"epochs", config.epochs},
                  {"train_fingerprint", model.train_fingerprint},
                  {"kernels", kernels::active().name}});
  std::cout << "model written to " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string data_dir;
  std::string report_dir;
  std::string model_path;
  std::string observers = "kinematic,ekf,hybrid";
  std::string tire = "linear";
};

int cmd_eval(const EvalArgs& args) {
  const LoadedSet data = load_split(args.data_dir, "test");

  std::vector<std::string> requested;
  for (const auto& field : io::split_fields(args.observers)) {
    if (!field.empty()) requested.emplace_back(field);
  }
  if (requested.empty()) throw ConfigError("no observers requested");

  const bool want_hybrid =
      std::find(requested.begin(), requested.end(), "hybrid") !=
      requested.end();
  io::ModelFile model;
  if (want_hybrid) {
    if (args.model_path.empty()) {
      throw ConfigError("--model is required for the hybrid observer");
    }
    model = io::read_model(args.model_path);
    const std::vector<std::string> canonical(
        hybrid::kFeatureChannels.begin(), hybrid::kFeatureChannels.end());
    if (model.channel_order != canonical) {
      throw SchemaError("model channel order does not match the data schema");
    }
  }

  ekf::EkfConfig ekf_config = ekf::EkfConfig::defaults();
  if (args.tire == "pacejka") {
    ekf_config.tire = vehicle::TireModel::Pacejka;
  } else if (args.tire != "linear") {
    throw ConfigError("unknown tire model '" + args.tire + "'");
  }

  std::vector<eval::TrajectoryData> report_data;
  for (std::size_t t = 0; t < data.trajectories.size(); ++t) {
    const auto& traj = data.trajectories[t];
    eval::TrajectoryData td;
    td.name = data.names[t];
    td.trajectory = &traj;
    for (const auto& name : requested) {
      eval::ObserverOutput out;
      out.name = name;
      if (name == "kinematic") {
        out.beta.reserve(traj.sensor.size());
        for (const auto& f : traj.sensor) {
          out.beta.push_back(
              vehicle::kinematic_sideslip(f.steer, data.params));
        }
      } else if (name == "ekf") {
        out.beta = ekf::run_ekf(traj.sensor, data.params, ekf_config);
      } else if (name == "hybrid") {
        out.beta = hybrid::run_hybrid(traj.sensor, model.weights,
                                      model.topology, model.standardizer,
                                      model.params);
      } else {
        throw ConfigError("unknown observer '" + name + "'");
      }
      td.observers.push_back(std::move(out));
    }
    report_data.push_back(std::move(td));
  }

  const eval::EvalReport report = eval::build_report(report_data);
  eval::write_report_csvs(report, report_data, args.report_dir);
  write_json(fs::path(args.report_dir) / "run_config_eval.json",
             json{{"command", "eval"},
                  {"data", args.data_dir},
                  {"model", args.model_path},
                  {"observers", args.observers},
                  {"ekf_tire", args.tire},
                  {"kernels", kernels::active().name}});
  std::cout << eval::render_tables(report);
  std::cout << "report written to " << args.report_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// infer

struct InferArgs {
  std::string model_path;
  std::string input_csv;
  std::string output_csv;
};

int cmd_infer(const InferArgs& args) {
  const io::ModelFile model = io::read_model(args.model_path);
  const sim::Trajectory traj = io::read_trajectory(args.input_csv);
  const std::vector<double> beta =
      hybrid::run_hybrid(traj.sensor, model.weights, model.topology,
                         model.standardizer, model.params);

  const fs::path out(args.output_csv);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream csv(out, std::ios::binary);
  if (!csv) throw SchemaError("cannot write " + out.string());
  csv << "t,beta_hat\n";
  for (std::size_t k = 0; k < beta.size(); ++k) {
    csv << io::format_double(traj.sensor[k].t) << ','
        << io::format_double(beta[k]) << '\n';
  }
  write_json(out.has_parent_path()
                 ? out.parent_path() / "run_config_infer.json"
                 : fs::path("run_config_infer.json"),
             json{{"command", "infer"},
                  {"model", args.model_path},
                  {"in", args.input_csv},
                  {"out", args.output_csv},
                  {"kernels", kernels::active().name}});
  std::cout << "wrote " << beta.size() << " estimates to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"side-slip angle estimation workbench"};
  app.require_subcommand(1);

  std::string kernels_impl = "auto";
  app.add_option("--kernels", kernels_impl,
                 "kernel implementation: auto|scalar|avx2");

  SimulateArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "generate synthetic trajectory logs");
  sim_cmd->add_option("--suite", sim_args.suite,
                      "benchmark|normal|harsh|custom");
  sim_cmd->add_option("--out", sim_args.out_dir, "output directory")
      ->required();
  sim_cmd->add_option("--seed", sim_args.seed, "master seed");
  sim_cmd->add_option("--duration", sim_args.duration,
                      "trajectory duration [s]");
  sim_cmd->add_option("--noise-scale", sim_args.noise_scale,
                      "scale on the default sensor noise");
  sim_cmd->add_option("--split-ratio", sim_args.split_ratio,
                      "train fraction of the stratified split");
  sim_cmd->add_option("--kind", sim_args.kind,
                      "custom maneuver kind "
                      "(step_steer|slalom|city_profile|ramp_steer)");
  sim_cmd->add_option("--amplitude", sim_args.amplitude,
                      "custom steering amplitude [rad]");
  sim_cmd->add_option("--frequency", sim_args.frequency,
                      "custom steering frequency [Hz]");
  sim_cmd->add_option("--speed", sim_args.speed, "custom target speed [m/s]");
  sim_args.vehicle.add_options(sim_cmd);

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "fit the learned observer");
  train_cmd->add_option("--data", train_args.data_dir, "data directory")
      ->required();
  train_cmd->add_option("--out", train_args.out_model, "output model file")
      ->required();
  train_cmd->add_option("--seed", train_args.seed, "master seed");
  train_cmd->add_option("--epochs", train_args.config.epochs, "epochs");
  train_cmd->add_option("--batch-size", train_args.config.batch_size,
                        "minibatch size");
  train_cmd->add_option("--learning-rate", train_args.config.learning_rate,
                        "Adam learning rate");
  train_cmd->add_option("--l2", train_args.config.l2_rate,
                        "L2 regularization rate");
  train_cmd->add_option("--concat", train_args.concat,
                        "prior entry point: stage2|stage1_input");

  EvalArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate observers on the test split");
  eval_cmd->add_option("--data", eval_args.data_dir, "data directory")
      ->required();
  eval_cmd->add_option("--report", eval_args.report_dir, "report directory")
      ->required();
  eval_cmd->add_option("--model", eval_args.model_path, "model file");
  eval_cmd->add_option("--observers", eval_args.observers,
                       "comma list of kinematic,ekf,hybrid");
  eval_cmd->add_option("--tire", eval_args.tire,
                       "EKF tire model: linear|pacejka");

  InferArgs infer_args;
  CLI::App* infer_cmd =
      app.add_subcommand("infer", "run the learned observer on one log");
  infer_cmd->add_option("--model", infer_args.model_path, "model file")
      ->required();
  infer_cmd->add_option("--in", infer_args.input_csv, "input trajectory csv")
      ->required();
  infer_cmd->add_option("--out", infer_args.output_csv, "output csv")
      ->required();

  try {
    app.parse(argc, argv);
    kernels::select(kernels_impl);
    if (sim_cmd->parsed()) return cmd_simulate(sim_args);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (infer_cmd->parsed()) return cmd_infer(infer_args);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const StratificationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    // LowSpeedError, DomainError, DivergenceError, NumericalError.
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
