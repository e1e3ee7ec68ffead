#include "sideslip/sim/split.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sideslip/rng.hpp"

namespace sideslip::sim {

SplitResult split_dataset(std::span<const RegimeLabel> labels, double ratio,
                          std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ConfigError("split: ratio must lie in (0, 1)");
  }
  Rng rng(seed);
  SplitResult result;
  for (RegimeLabel wanted : {RegimeLabel::Normal, RegimeLabel::Dynamic}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == wanted) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < 2) {
      throw StratificationError(
          std::string("split: label '") + to_string(wanted) +
          "' has fewer than two trajectories");
    }
    rng.shuffle(members);
    const auto n_train = static_cast<std::size_t>(
        std::lround(ratio * static_cast<double>(members.size())));
    for (std::size_t j = 0; j < members.size(); ++j) {
      (j < n_train ? result.train_indices : result.test_indices)
          .push_back(members[j]);
    }
  }
  std::sort(result.train_indices.begin(), result.train_indices.end());
  std::sort(result.test_indices.begin(), result.test_indices.end());
  return result;
}

}  // namespace sideslip::sim
