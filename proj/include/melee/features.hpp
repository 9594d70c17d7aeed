#pragma once

#include <span>
#include <vector>

#include "melee/types.hpp"

namespace melee {

// What the meta-feature extractor is allowed to see of a past round. No
// context coordinates, by construction: the exploration policy must stay
// task-independent.
struct ArmObservation {
  int action = 0;
  double reward = 0.0;
  double propensity = 1.0;
};

std::vector<ArmObservation> observations(const History& h);

// Fixed-layout meta-features of length 5K+2:
//   [0,K)        calibrated action probabilities
//   [K]          entropy of that distribution (nats)
//   [K+1,2K+1)   one-hot of the predicted action
//   [2K+1]       normalized time t/horizon
//   [2K+2,3K+2)  normalized action counts over the history
//   [3K+2,4K+2)  mean observed reward per action
//   [4K+2,5K+2)  population variance of observed reward per action
struct MetaFeatures {
  std::vector<double> values;

  static int length(int num_actions) { return 5 * num_actions + 2; }

  int num_actions() const { return (static_cast<int>(values.size()) - 2) / 5; }
  std::span<const double> probability_block() const;
  double entropy() const;
  std::span<const double> one_hot_block() const;
  double normalized_time() const;
  std::span<const double> count_block() const;
  std::span<const double> mean_reward_block() const;
  std::span<const double> reward_variance_block() const;
};

// Builds the meta-features for round t (1-based) of `horizon` total rounds.
// Takes only the scorer's outputs on the current context, never the context
// itself; the history enters through action/reward observations alone.
MetaFeatures extract(const ActionDistribution& calibrated, int greedy_action,
                     std::span<const ArmObservation> past, int t, int horizon);

}  // namespace melee
