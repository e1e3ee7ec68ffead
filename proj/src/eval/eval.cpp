#include "sideslip/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sideslip/io/csv.hpp"

namespace sideslip::eval {

double mae_mrad(std::span<const double> estimates,
                std::span<const double> references) {
  if (estimates.size() != references.size()) {
    throw ShapeError("mae: series length mismatch");
  }
  if (estimates.empty()) throw ShapeError("mae: empty series");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (std::isnan(estimates[i]) || std::isnan(references[i])) continue;
    sum += std::fabs(estimates[i] - references[i]);
    n += 1;
  }
  if (n == 0) throw NumericalError("mae: no valid frame pairs");
  return 1000.0 * sum / static_cast<double>(n);
}

std::vector<double> error_series(std::span<const double> estimates,
                                 std::span<const double> references) {
  if (estimates.size() != references.size()) {
    throw ShapeError("error_series: series length mismatch");
  }
  std::vector<double> errors(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    errors[i] = std::fabs(estimates[i] - references[i]);
  }
  return errors;
}

std::vector<double> reference_lateral_accel(
    std::span<const sim::ReferenceFrame> frames) {
  const std::size_t n = frames.size();
  std::vector<double> ay(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double dvy = 0.0;
    if (n > 1) {
      if (k == 0) {
        dvy = (frames[1].vy - frames[0].vy) / (frames[1].t - frames[0].t);
      } else if (k + 1 == n) {
        dvy = (frames[k].vy - frames[k - 1].vy) /
              (frames[k].t - frames[k - 1].t);
      } else {
        dvy = (frames[k + 1].vy - frames[k - 1].vy) /
              (frames[k + 1].t - frames[k - 1].t);
      }
    }
    ay[k] = dvy + frames[k].yaw_rate * frames[k].vx;
  }
  return ay;
}

ManeuverClass classify_maneuver(std::span<const sim::ReferenceFrame> ref,
                                std::span<const sim::SensorFrame> sensor) {
  if (ref.empty()) throw ShapeError("classify_maneuver: empty trajectory");
  if (!sensor.empty() && sensor.size() != ref.size()) {
    throw ShapeError("classify_maneuver: sensor/reference length mismatch");
  }
  double peak = 0.0;
  for (double a : reference_lateral_accel(ref)) {
    peak = std::max(peak, std::fabs(a));
  }
  const double ratio = peak / kGravity;
  return {ratio >= 0.5 ? sim::RegimeLabel::Dynamic : sim::RegimeLabel::Normal,
          ratio};
}

EvalReport build_report(std::span<const TrajectoryData> data) {
  if (data.empty()) throw ShapeError("report: no trajectories");
  EvalReport report;
  for (const auto& obs : data.front().observers) {
    report.observer_names.push_back(obs.name);
  }
  if (report.observer_names.empty()) {
    throw ShapeError("report: no observers");
  }

  for (const auto& traj : data) {
    if (traj.observers.size() != report.observer_names.size()) {
      throw ShapeError("report: observer set differs between trajectories");
    }
    const std::size_t frames = traj.trajectory->reference.size();
    for (std::size_t o = 0; o < traj.observers.size(); ++o) {
      if (traj.observers[o].name != report.observer_names[o]) {
        throw ShapeError("report: observer order differs between trajectories");
      }
      if (traj.observers[o].beta.size() != frames) {
        throw ShapeError("report: observer '" + traj.observers[o].name +
                         "' output length mismatch on '" + traj.name + "'");
      }
    }

    TrajectoryStats stats;
    stats.name = traj.name;
    const ManeuverClass mc =
        classify_maneuver(traj.trajectory->reference, traj.trajectory->sensor);
    stats.label = mc.label;
    stats.max_lateral_g = mc.max_lateral_g;
    stats.valid_frames = 0;
    stats.abs_err_sum.assign(report.observer_names.size(), 0.0);
    stats.max_err.assign(report.observer_names.size(), 0.0);

    for (std::size_t k = 0; k < frames; ++k) {
      bool valid = true;
      for (const auto& obs : traj.observers) {
        if (std::isnan(obs.beta[k])) {
          valid = false;
          break;
        }
      }
      if (!valid) continue;
      stats.valid_frames += 1;
      const double ref_beta = traj.trajectory->reference[k].sideslip;
      for (std::size_t o = 0; o < traj.observers.size(); ++o) {
        const double err = std::fabs(traj.observers[o].beta[k] - ref_beta);
        stats.abs_err_sum[o] += err;
        stats.max_err[o] = std::max(stats.max_err[o], err);
      }
    }
    report.trajectories.push_back(std::move(stats));
  }
  return report;
}

double EvalReport::trajectory_mae_mrad(const TrajectoryStats& t,
                                       std::size_t observer) const {
  if (t.valid_frames == 0) return std::nan("");
  return 1000.0 * t.abs_err_sum[observer] /
         static_cast<double>(t.valid_frames);
}

namespace {

Summary summarize(const EvalReport& report, std::size_t observer,
                  const sim::RegimeLabel* label) {
  Summary s;
  double err_sum = 0.0;
  double max_err = 0.0;
  for (const auto& t : report.trajectories) {
    if (label && t.label != *label) continue;
    err_sum += t.abs_err_sum[observer];
    max_err = std::max(max_err, t.max_err[observer]);
    s.frames += t.valid_frames;
    s.trajectories += 1;
  }
  s.mae_mrad =
      s.frames ? 1000.0 * err_sum / static_cast<double>(s.frames) : 0.0;
  s.max_err_mrad = 1000.0 * max_err;
  return s;
}

}  // namespace

Summary EvalReport::whole(std::size_t observer) const {
  return summarize(*this, observer, nullptr);
}

Summary EvalReport::regime(std::size_t observer,
                           sim::RegimeLabel label) const {
  return summarize(*this, observer, &label);
}

namespace {

void write_summary_csv(const std::string& path, const EvalReport& report,
                       const sim::RegimeLabel* label) {
  std::ofstream out(path);
  if (!out) throw SchemaError("report: cannot write " + path);
  out << "observer,mae_mrad,max_abs_err_mrad,frames,trajectories\n";
  for (std::size_t o = 0; o < report.observer_names.size(); ++o) {
    const Summary s = label ? report.regime(o, *label) : report.whole(o);
    out << report.observer_names[o] << ',' << io::format_double(s.mae_mrad)
        << ',' << io::format_double(s.max_err_mrad) << ',' << s.frames << ','
        << s.trajectories << '\n';
  }
}

}  // namespace

void write_report_csvs(const EvalReport& report,
                       std::span<const TrajectoryData> data,
                       const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  const sim::RegimeLabel normal = sim::RegimeLabel::Normal;
  const sim::RegimeLabel dynamic = sim::RegimeLabel::Dynamic;
  write_summary_csv(dir + "/mae_whole.csv", report, nullptr);
  write_summary_csv(dir + "/mae_normal.csv", report, &normal);
  write_summary_csv(dir + "/mae_dynamic.csv", report, &dynamic);

  {
    std::ofstream out(dir + "/per_trajectory_mae.csv");
    if (!out) throw SchemaError("report: cannot write per_trajectory_mae.csv");
    out << "trajectory,label,max_ay_g,observer,mae_mrad\n";
    for (const auto& t : report.trajectories) {
      for (std::size_t o = 0; o < report.observer_names.size(); ++o) {
        out << t.name << ',' << sim::to_string(t.label) << ','
            << io::format_double(t.max_lateral_g) << ','
            << report.observer_names[o] << ','
            << io::format_double(report.trajectory_mae_mrad(t, o)) << '\n';
      }
    }
  }

  for (const auto& traj : data) {
    const auto& ref = traj.trajectory->reference;
    const std::vector<double> ay = reference_lateral_accel(ref);
    {
      std::ofstream out(dir + "/overlay_" + traj.name + ".csv");
      out << "t,beta_ref";
      for (const auto& obs : traj.observers) out << ",beta_" << obs.name;
      out << '\n';
      for (std::size_t k = 0; k < ref.size(); ++k) {
        out << io::format_double(ref[k].t) << ','
            << io::format_double(ref[k].sideslip);
        for (const auto& obs : traj.observers) {
          out << ',' << io::format_double(obs.beta[k]);
        }
        out << '\n';
      }
    }
    {
      std::ofstream out(dir + "/errors_" + traj.name + ".csv");
      out << "t,abs_ay_g";
      for (const auto& obs : traj.observers) out << ",err_" << obs.name;
      out << '\n';
      for (std::size_t k = 0; k < ref.size(); ++k) {
        out << io::format_double(ref[k].t) << ','
            << io::format_double(std::fabs(ay[k]) / kGravity);
        for (const auto& obs : traj.observers) {
          out << ','
              << io::format_double(std::fabs(obs.beta[k] - ref[k].sideslip));
        }
        out << '\n';
      }
    }
  }
}

std::string render_tables(const EvalReport& report) {
  std::ostringstream out;
  auto table = [&](const char* title, const sim::RegimeLabel* label) {
    out << title << '\n';
    out << "  observer     mae [mrad]   max [mrad]      frames\n";
    for (std::size_t o = 0; o < report.observer_names.size(); ++o) {
      const Summary s = label ? report.regime(o, *label) : report.whole(o);
      char line[128];
      std::snprintf(line, sizeof(line), "  %-12s %10.3f %12.3f %11zu\n",
                    report.observer_names[o].c_str(), s.mae_mrad,
                    s.max_err_mrad, s.frames);
      out << line;
    }
  };
  const sim::RegimeLabel normal = sim::RegimeLabel::Normal;
  const sim::RegimeLabel dynamic = sim::RegimeLabel::Dynamic;
  table("MAE, whole testing set", nullptr);
  table("MAE, normal maneuvers (max |ay| < 0.5 g)", &normal);
  table("MAE, dynamic maneuvers (max |ay| >= 0.5 g)", &dynamic);
  return out.str();
}

}  // namespace sideslip::eval
