#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sideslip/common.hpp"

namespace sideslip::sim {

/// Maneuver regime by peak lateral acceleration: Dynamic at or above 0.5 g.
enum class RegimeLabel { Normal, Dynamic };

inline const char* to_string(RegimeLabel l) {
  return l == RegimeLabel::Normal ? "normal" : "dynamic";
}

struct SplitResult {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// Stratified train/test split at trajectory granularity: within each label,
/// round(ratio * count) trajectories go to train, selected by a seeded
/// shuffle. Labels present with fewer than two trajectories cannot be
/// stratified and raise StratificationError.
SplitResult split_dataset(std::span<const RegimeLabel> labels, double ratio,
                          std::uint64_t seed);

}  // namespace sideslip::sim
