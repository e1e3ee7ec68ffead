#include "sideslip/io/trajectory_csv.hpp"

#include <fstream>

#include "sideslip/io/csv.hpp"

namespace sideslip::io {

void write_trajectory(const std::string& path, const sim::Trajectory& traj) {
  if (traj.sensor.size() != traj.reference.size()) {
    throw ShapeError("trajectory: sensor/reference length mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("trajectory: cannot open '" + path + "'");

  for (std::size_t c = 0; c < kTrajectoryColumns.size(); ++c) {
    out << (c ? "," : "") << kTrajectoryColumns[c];
  }
  out << '\n';

  for (std::size_t k = 0; k < traj.sensor.size(); ++k) {
    const auto& s = traj.sensor[k];
    const auto& r = traj.reference[k];
    const double row[20] = {s.t,        s.accel_x,  s.accel_y, s.yaw_rate,
                            s.wheel_fl, s.wheel_fr, s.wheel_rl, s.wheel_rr,
                            s.steer,    r.sideslip, r.vx,      r.vy,
                            r.yaw,      r.pos_x,    r.pos_y,   r.pitch,
                            r.roll,     r.yaw_rate, r.pitch_rate,
                            r.roll_rate};
    for (int c = 0; c < 20; ++c) {
      out << (c ? "," : "") << format_double(row[c]);
    }
    out << '\n';
  }
  if (!out) throw SchemaError("trajectory: write failed for '" + path + "'");
}

sim::Trajectory read_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("trajectory: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw MalformedHeaderError("trajectory: missing header in '" + path + "'");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    const auto fields = split_fields(line);
    if (fields.size() != kTrajectoryColumns.size()) {
      throw MalformedHeaderError("trajectory: expected " +
                                 std::to_string(kTrajectoryColumns.size()) +
                                 " columns, got " +
                                 std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (fields[c] != kTrajectoryColumns[c]) {
        throw MalformedHeaderError(
            "trajectory: column " + std::to_string(c) + " is '" +
            std::string(fields[c]) + "', expected '" + kTrajectoryColumns[c] +
            "'");
      }
    }
  }

  sim::Trajectory traj;
  std::size_t row_no = 0;
  double prev_t = 0.0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_no;
    const auto fields = split_fields(line);
    if (fields.size() != kTrajectoryColumns.size()) {
      throw RowArityError("trajectory: row " + std::to_string(row_no) +
                          " has " + std::to_string(fields.size()) +
                          " fields, expected " +
                          std::to_string(kTrajectoryColumns.size()));
    }
    double v[20];
    for (int c = 0; c < 20; ++c) {
      v[c] = parse_double(fields[c], "trajectory");
    }
    if (row_no > 1 && !(v[0] > prev_t)) {
      throw NonMonotoneTimeError("trajectory: t not strictly increasing at "
                                 "row " +
                                 std::to_string(row_no));
    }
    prev_t = v[0];

    sim::SensorFrame s{};
    s.t = v[0];
    s.accel_x = v[1];
    s.accel_y = v[2];
    s.yaw_rate = v[3];
    s.wheel_fl = v[4];
    s.wheel_fr = v[5];
    s.wheel_rl = v[6];
    s.wheel_rr = v[7];
    s.steer = v[8];
    sim::ReferenceFrame r{};
    r.t = v[0];
    r.sideslip = v[9];
    r.vx = v[10];
    r.vy = v[11];
    r.yaw = v[12];
    r.pos_x = v[13];
    r.pos_y = v[14];
    r.pitch = v[15];
    r.roll = v[16];
    r.yaw_rate = v[17];
    r.pitch_rate = v[18];
    r.roll_rate = v[19];
    traj.sensor.push_back(s);
    traj.reference.push_back(r);
  }
  return traj;
}

}  // namespace sideslip::io
