#include "sideslip/sim/histogram.hpp"

#include <algorithm>
#include <cmath>

namespace sideslip::sim {

std::uint64_t FrictionCircleGrid::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

FrictionCircleGrid friction_circle_histogram(
    std::span<const SensorFrame> frames, int bins) {
  if (bins < 1) throw ConfigError("friction_circle_histogram: bins must be >= 1");
  FrictionCircleGrid grid;
  grid.bins = bins;
  grid.counts.assign(static_cast<std::size_t>(bins) * bins, 0);
  const double width = (grid.hi - grid.lo) / bins;
  auto index = [&](double v) {
    const int i = static_cast<int>(std::floor((v - grid.lo) / width));
    return std::clamp(i, 0, bins - 1);
  };
  for (const auto& f : frames) {
    grid.at(index(f.accel_x / kGravity), index(f.accel_y / kGravity)) += 1;
  }
  return grid;
}

std::uint64_t SideslipHistogram::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

SideslipHistogram sideslip_histogram(std::span<const ReferenceFrame> frames,
                                     double bin_width) {
  if (!(bin_width > 0.0)) {
    throw ConfigError("sideslip_histogram: bin width must be > 0");
  }
  SideslipHistogram h;
  h.bin_width = bin_width;
  if (frames.empty()) return h;

  std::int64_t lo = 0, hi = 0;
  bool first = true;
  std::vector<std::int64_t> indices;
  indices.reserve(frames.size());
  for (const auto& f : frames) {
    const auto i =
        static_cast<std::int64_t>(std::floor(f.sideslip / bin_width));
    indices.push_back(i);
    lo = first ? i : std::min(lo, i);
    hi = first ? i : std::max(hi, i);
    first = false;
  }
  h.first_index = lo;
  h.counts.assign(static_cast<std::size_t>(hi - lo + 1), 0);
  for (auto i : indices) h.counts[static_cast<std::size_t>(i - lo)] += 1;
  return h;
}

}  // namespace sideslip::sim
