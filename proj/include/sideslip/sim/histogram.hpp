#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sideslip/sim/simulator.hpp"

namespace sideslip::sim {

/// Square count grid over (ax/g, ay/g), both axes spanning [-1.1, 1.1].
/// Out-of-range samples are clamped into the edge cells so the grid always
/// conserves the total sample count.
struct FrictionCircleGrid {
  int bins = 0;
  double lo = -1.1;
  double hi = 1.1;
  std::vector<std::uint64_t> counts;  // bins x bins, row = ax index

  std::uint64_t& at(int ix, int iy) { return counts[ix * bins + iy]; }
  std::uint64_t at(int ix, int iy) const { return counts[ix * bins + iy]; }
  std::uint64_t total() const;
  double center(int i) const {
    return lo + (static_cast<double>(i) + 0.5) * (hi - lo) / bins;
  }
};

FrictionCircleGrid friction_circle_histogram(
    std::span<const SensorFrame> frames, int bins);

/// 1-D side-slip histogram with fixed bin width; bin i covers
/// [first_index + i, first_index + i + 1) * bin_width.
struct SideslipHistogram {
  double bin_width = 0.0;
  std::int64_t first_index = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const;
  double bin_center(std::size_t i) const {
    return (static_cast<double>(first_index) + static_cast<double>(i) + 0.5) *
           bin_width;
  }
};

SideslipHistogram sideslip_histogram(std::span<const ReferenceFrame> frames,
                                     double bin_width);

}  // namespace sideslip::sim
