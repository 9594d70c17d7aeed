#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "melee/datasets.hpp"
#include "melee/explorers.hpp"
#include "melee/features.hpp"
#include "melee/polopt.hpp"
#include "melee/scorer.hpp"
#include "melee/types.hpp"

namespace melee {

// One training row for the exploration policy: meta-features at a visited
// state plus the expert roll-out value of every action.
struct MetaExample {
  MetaFeatures features;
  std::vector<double> values;  // in [0,1]^K
};

// K linear value regressors over meta-features; acting = argmax value.
struct ExplorationPolicy {
  int num_actions = 0;
  int feature_len = 0;
  std::vector<double> weights;  // K x feature_len, row-major
  std::vector<double> bias;     // K

  static ExplorationPolicy zero(int num_actions);

  std::vector<double> values(const MetaFeatures& phi) const;
  int act(const MetaFeatures& phi) const;
};

int pi_act(const ExplorationPolicy& pi, const MetaFeatures& phi);

// One-step expert roll-out: the true reward of the probed action.
double rollout_value(const RewardVector& rv, int action);

// Roll-in distribution: smoothed point mass around the policy's choice.
// Uniform at mu = 1/K regardless of the policy.
ActionDistribution rollin_distribution(const ExplorationPolicy& pi,
                                       const MetaFeatures& phi, double mu);

struct MeleeConfig {
  double mu = 0.1;     // roll-in exploration, in [0, 1/K]
  int n_val = 30;      // validation rows split off per episode
  int rounds = 10;     // outer rounds N
  double test_mu = 0.0;
  PolOptMethod method = PolOptMethod::direct;
  int calibration_period = 50;
  int selection_tasks = 5;  // fresh tasks for picking the returned policy
  int selection_task_size = 500;
  double ridge = 1e-6;  // Learn(D) regularization
};

struct TrainProgress {
  int round = 0;
  int task_index = 0;
  int tr_rows = 0;
  std::size_t meta_rows = 0;
  double episode_return = 0.0;
};

struct TrainResult {
  std::vector<ExplorationPolicy> policies;  // pi_1..pi_N
  int selected = 0;                         // index into policies
  std::vector<double> selection_returns;    // mean G per candidate policy
  std::vector<MetaExample> meta_dataset;    // final aggregated D
  std::vector<TrainProgress> progress;

  const ExplorationPolicy& policy() const { return policies[selected]; }
};

// Imitation-learning meta-training: per outer round, simulate a bandit
// episode on a random task, probe every action's one-step expert value,
// aggregate (features, values) rows, and refit the policy on everything
// aggregated so far. Returns all policies plus the one with the best mean
// progressive reward on fresh held-out tasks.
TrainResult train_melee(const std::vector<SupervisedDataset>& tasks,
                        const MeleeConfig& cfg, Rng rng);

// Squared-loss fit of per-action values on meta-features (closed form,
// lightly ridged because the feature blocks are exactly collinear).
ExplorationPolicy learn_policy(const std::vector<MetaExample>& data,
                               int num_actions, double ridge = 1e-6);

// --- Test-time protocol -----------------------------------------------

struct RoundRecord {
  int action = 0;
  int greedy = 0;  // argmax of the played distribution
  double reward = 0.0;
  double propensity = 1.0;
};

struct RunTrace {
  std::vector<RoundRecord> rounds;

  std::vector<double> rewards() const;
};

struct AgentConfig {
  PolOptMethod method = PolOptMethod::direct;
  int calibration_period = 50;
};

struct RunOutput {
  History history;
  RunTrace trace;
  HyperParams hyperparams;
};

// Shared bandit loop: hyperparameters and the scaler come from the stream's
// 30 calibration rows, the scorer is optimized incrementally, and the
// calibrator is refit periodically on the same rows. Every explorer
// (baseline or policy-driven) runs through here so streams stay paired.
RunOutput run_bandit(const BanditStream& stream, Explorer& explorer,
                     const AgentConfig& cfg, Rng rng);

// Deploys a trained exploration policy with mixture(test_mu) smoothing.
class PolicyExplorer : public Explorer {
 public:
  PolicyExplorer(ExplorationPolicy policy, double test_mu);
  std::string name() const override { return "melee"; }
  ActionDistribution distribution(const RoundView& view, Rng& rng) override;

 private:
  ExplorationPolicy policy_;
  double test_mu_;
};

RunOutput run_agent(const ExplorationPolicy& pi, PolOptMethod method,
                    const SupervisedDataset& dataset, double test_mu,
                    std::uint64_t seed);

// Versioned JSON round trip for trained policies.
std::string policy_to_json(const ExplorationPolicy& pi, const MeleeConfig& cfg);
ExplorationPolicy policy_from_json(const std::string& text);
void save_policy(const std::string& path, const ExplorationPolicy& pi,
                 const MeleeConfig& cfg);
ExplorationPolicy load_policy(const std::string& path);

// Newline-delimited JSON progress log.
void write_training_log(const std::string& path, const TrainResult& result);

}  // namespace melee
