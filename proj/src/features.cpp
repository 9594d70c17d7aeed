#include "melee/features.hpp"

#include <cmath>

namespace melee {

std::vector<ArmObservation> observations(const History& h) {
  std::vector<ArmObservation> obs;
  obs.reserve(h.size());
  for (const auto& rec : h.records) {
    obs.push_back({rec.action, rec.reward, rec.propensity});
  }
  return obs;
}

std::span<const double> MetaFeatures::probability_block() const {
  const int K = num_actions();
  return {values.data(), static_cast<std::size_t>(K)};
}

double MetaFeatures::entropy() const { return values[num_actions()]; }

std::span<const double> MetaFeatures::one_hot_block() const {
  const int K = num_actions();
  return {values.data() + K + 1, static_cast<std::size_t>(K)};
}

double MetaFeatures::normalized_time() const {
  return values[2 * num_actions() + 1];
}

std::span<const double> MetaFeatures::count_block() const {
  const int K = num_actions();
  return {values.data() + 2 * K + 2, static_cast<std::size_t>(K)};
}

std::span<const double> MetaFeatures::mean_reward_block() const {
  const int K = num_actions();
  return {values.data() + 3 * K + 2, static_cast<std::size_t>(K)};
}

std::span<const double> MetaFeatures::reward_variance_block() const {
  const int K = num_actions();
  return {values.data() + 4 * K + 2, static_cast<std::size_t>(K)};
}

MetaFeatures extract(const ActionDistribution& calibrated, int greedy_action,
                     std::span<const ArmObservation> past, int t, int horizon) {
  calibrated.validate();
  const int K = calibrated.num_actions();
  if (greedy_action < 0 || greedy_action >= K)
    throw ConfigError("extract: greedy action out of range");
  if (horizon < 1 || t < 1) throw ConfigError("extract: need t >= 1 and horizon >= 1");

  MetaFeatures phi;
  phi.values.assign(MetaFeatures::length(K), 0.0);
  double* v = phi.values.data();

  for (int k = 0; k < K; ++k) v[k] = calibrated.probabilities[k];

  double entropy = 0.0;
  for (int k = 0; k < K; ++k) {
    const double p = calibrated.probabilities[k];
    if (p > 0.0) entropy -= p * std::log(p);
  }
  v[K] = std::max(entropy, 0.0);

  v[K + 1 + greedy_action] = 1.0;
  v[2 * K + 1] = static_cast<double>(t) / static_cast<double>(horizon);

  std::vector<int> counts(K, 0);
  std::vector<double> sums(K, 0.0);
  for (const auto& obs : past) {
    counts[obs.action] += 1;
    sums[obs.action] += obs.reward;
  }
  if (!past.empty()) {
    const double n = static_cast<double>(past.size());
    for (int k = 0; k < K; ++k) {
      v[2 * K + 2 + k] = static_cast<double>(counts[k]) / n;
      if (counts[k] > 0) v[3 * K + 2 + k] = sums[k] / counts[k];
    }
    for (const auto& obs : past) {
      const double c = obs.reward - v[3 * K + 2 + obs.action];
      v[4 * K + 2 + obs.action] += c * c;
    }
    for (int k = 0; k < K; ++k) {
      if (counts[k] > 0) v[4 * K + 2 + k] /= counts[k];
    }
  }
  return phi;
}

}  // namespace melee
