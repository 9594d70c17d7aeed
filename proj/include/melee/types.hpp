#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "melee/rng.hpp"

namespace melee {

// Error taxonomy, mapped to CLI exit codes (usage=2, data=3, numeric=4).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

// Actions are 0-based everywhere: in memory, in files, and on the wire.

struct Context {
  std::vector<double> features;

  int dim() const { return static_cast<int>(features.size()); }
  void validate() const;  // finite entries, dim >= 1
};

// Per-action rewards in [0,1]^K. Fully observed only in supervised data.
struct RewardVector {
  std::vector<double> rewards;

  int num_actions() const { return static_cast<int>(rewards.size()); }
  int best_action() const;  // argmax, lowest index on ties
  void validate() const;
};

// One logged bandit round: (x, a, r(a), p). The propensity is the exact
// probability mass the agent assigned to the chosen action, never an
// empirical estimate.
struct Interaction {
  Context context;
  int action = 0;
  double reward = 0.0;
  double propensity = 1.0;

  void validate(int num_actions) const;
};

// Append-only bandit log for one episode.
struct History {
  std::vector<Interaction> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  void append(Interaction rec) { records.push_back(std::move(rec)); }
};

struct LabeledExample {
  Context x;
  RewardVector r;
};

struct SupervisedDataset {
  std::vector<LabeledExample> rows;
  int num_actions = 0;  // K
  int dim = 0;          // D

  std::size_t size() const { return rows.size(); }
  void validate() const;  // nonempty, homogeneous K and D, rewards in range
};

// Probability vector over the K actions. Entries >= 0, sum 1 within 1e-9.
struct ActionDistribution {
  std::vector<double> probabilities;

  int num_actions() const { return static_cast<int>(probabilities.size()); }
  bool is_valid(double tol = 1e-9) const;
  void validate(double tol = 1e-9) const;
};

// Test-time mixture: play `greedy_action` with probability 1-mu, uniform
// otherwise, so p(greedy) = 1-mu+mu/K and p(other) = mu/K.
ActionDistribution mixture(int greedy_action, double mu, int num_actions);

// Train-time roll-in / Banditron smoothing: p(a) = mu + (1-K*mu)*1[a=greedy].
// Uniform at mu = 1/K, deterministic at mu = 0.
ActionDistribution smoothed_point_mass(int greedy_action, double mu,
                                       int num_actions);

// Draws an action; the returned propensity is the exact mass of that action.
std::pair<int, double> sample(const ActionDistribution& dist, Rng& rng);

int argmax_lowest(const std::vector<double>& values);

// Interaction logs as newline-delimited JSON records {x:[...],a:,r:,p:}.
void write_history_ndjson(const std::string& path, const History& h);
History read_history_ndjson(const std::string& path);

}  // namespace melee
