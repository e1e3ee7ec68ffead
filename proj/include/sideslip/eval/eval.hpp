#pragma once

#include <span>
#include <string>
#include <vector>

#include "sideslip/sim/simulator.hpp"
#include "sideslip/sim/split.hpp"

namespace sideslip::eval {

/// Mean absolute error in milliradians. Pairs where either side is NaN
/// (invalid-frame markers) are excluded; at least one valid pair must
/// remain.
double mae_mrad(std::span<const double> estimates,
                std::span<const double> references);

/// Per-frame absolute error e_k = |est_k - ref_k| [rad].
std::vector<double> error_series(std::span<const double> estimates,
                                 std::span<const double> references);

/// Ground-truth lateral acceleration reconstructed from the reference
/// channels: dvy/dt (central differences) + yaw_rate * vx.
std::vector<double> reference_lateral_accel(
    std::span<const sim::ReferenceFrame> frames);

struct ManeuverClass {
  sim::RegimeLabel label;
  double max_lateral_g;
};

/// Regime of a trajectory from ground truth only: Dynamic iff the peak |ay|
/// reaches 0.5 g (inclusive). The sensor log is only cross-checked for
/// length; classification never looks at measured or estimated values.
ManeuverClass classify_maneuver(std::span<const sim::ReferenceFrame> ref,
                                std::span<const sim::SensorFrame> sensor);

struct ObserverOutput {
  std::string name;
  std::vector<double> beta;  // one estimate per frame, NaN = invalid
};

struct TrajectoryData {
  std::string name;
  const sim::Trajectory* trajectory = nullptr;
  std::vector<ObserverOutput> observers;
};

/// Per-trajectory error sums over the frames where every observer is valid,
/// so all observers are compared on identical samples.
struct TrajectoryStats {
  std::string name;
  sim::RegimeLabel label;
  double max_lateral_g;
  std::size_t valid_frames;
  std::vector<double> abs_err_sum;  // [rad], aligned with observer_names
  std::vector<double> max_err;      // [rad]
};

struct Summary {
  double mae_mrad = 0.0;
  double max_err_mrad = 0.0;
  std::size_t frames = 0;
  std::size_t trajectories = 0;
};

struct EvalReport {
  std::vector<std::string> observer_names;
  std::vector<TrajectoryStats> trajectories;

  Summary whole(std::size_t observer) const;
  Summary regime(std::size_t observer, sim::RegimeLabel label) const;
  double trajectory_mae_mrad(const TrajectoryStats& t,
                             std::size_t observer) const;
};

EvalReport build_report(std::span<const TrajectoryData> data);

/// Emits the report tables and the per-trajectory overlay/error CSVs into
/// `dir`: mae_whole.csv, mae_normal.csv, mae_dynamic.csv,
/// per_trajectory_mae.csv, overlay_<name>.csv, errors_<name>.csv.
void write_report_csvs(const EvalReport& report,
                       std::span<const TrajectoryData> data,
                       const std::string& dir);

/// Renders the three MAE tables as aligned plain text.
std::string render_tables(const EvalReport& report);

}  // namespace sideslip::eval
