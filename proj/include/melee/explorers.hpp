#pragma once

#include <memory>
#include <string>
#include <vector>

#include "melee/polopt.hpp"
#include "melee/scorer.hpp"
#include "melee/types.hpp"

namespace melee {

// Everything an exploration strategy may look at in one round.
struct RoundView {
  const Scorer& scorer;  // current f_t (calibrated)
  const Context& x;
  const History& history;  // h_{t-1}
  int t = 1;               // 1-based round index
  int horizon = 1;         // total bandit rounds
};

// Shared learner settings handed to explorers that train their own models.
struct LearnerSetup {
  FeatureScaler scaler;
  double learning_rate = 0.1;
  PolOptMethod method = PolOptMethod::direct;
};

class Explorer {
 public:
  virtual ~Explorer() = default;
  virtual std::string name() const = 0;
  virtual void begin(int num_actions, int dim, int horizon,
                     const LearnerSetup& setup) {}
  virtual ActionDistribution distribution(const RoundView& view, Rng& rng) = 0;
  virtual void observe(const Context& x, int action, double reward,
                       double propensity, Rng& rng) {}
};

// p(greedy) = 1-eps+eps/K, others eps/K; eps may span the whole [0,1].
ActionDistribution epsilon_greedy_distribution(int greedy_action, double eps,
                                               int num_actions);

class EpsilonGreedy : public Explorer {
 public:
  explicit EpsilonGreedy(double eps = 0.0);
  std::string name() const override { return "epsilon-greedy"; }
  ActionDistribution distribution(const RoundView& view, Rng& rng) override;

 private:
  double eps_;
};

// eps_t = min(1, eps0/t).
class EpsilonDecreasing : public Explorer {
 public:
  explicit EpsilonDecreasing(double eps0 = 0.1);
  std::string name() const override { return "epsilon-decreasing"; }
  ActionDistribution distribution(const RoundView& view, Rng& rng) override;
  static double epsilon_at(double eps0, int t);

 private:
  double eps0_;
};

// Hedges over the candidate set {0.05*i + 0.01 : i = 1..10} of epsilons with
// multiplicative weight updates on importance-weighted reward estimates.
class ExponentiatedGradientGreedy : public Explorer {
 public:
  explicit ExponentiatedGradientGreedy(double eta = 0.1);
  std::string name() const override { return "eg-greedy"; }
  void begin(int num_actions, int dim, int horizon,
             const LearnerSetup& setup) override;
  ActionDistribution distribution(const RoundView& view, Rng& rng) override;
  void observe(const Context& x, int action, double reward, double propensity,
               Rng& rng) override;

  const std::vector<double>& candidate_epsilons() const { return candidates_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  double eta_;
  std::vector<double> candidates_;
  std::vector<double> weights_;
  int num_actions_ = 0;
  int last_greedy_ = -1;
};

// Ridge-regularized per-action confidence bounds over scaled features.
// Falls back to a diagonal covariance when the dimension exceeds 150.
class LinUcb : public Explorer {
 public:
  explicit LinUcb(double alpha = 1.0, int diagonal_threshold = 150);
  std::string name() const override { return "linucb"; }
  void begin(int num_actions, int dim, int horizon,
             const LearnerSetup& setup) override;
  ActionDistribution distribution(const RoundView& view, Rng& rng) override;
  void observe(const Context& x, int action, double reward, double propensity,
               Rng& rng) override;

  bool diagonal_mode() const { return diagonal_; }
  std::vector<double> upper_bounds(const Context& x) const;

 private:
  double alpha_;
  int diagonal_threshold_;
  bool diagonal_ = false;
  int num_actions_ = 0;
  int dim_ = 0;
  FeatureScaler scaler_;
  std::vector<std::vector<double>> a_inv_;   // full mode: per-action D x D
  std::vector<std::vector<double>> a_diag_;  // diagonal mode: per-action D
  std::vector<std::vector<double>> b_;       // per-action D
};

// Uniform over the first tau fraction of the stream, greedy afterwards.
class TauFirst : public Explorer {
 public:
  explicit TauFirst(double tau = 0.02);
  std::string name() const override { return "tau-first"; }
  void begin(int num_actions, int dim, int horizon,
             const LearnerSetup& setup) override;
  ActionDistribution distribution(const RoundView& view, Rng& rng) override;

 private:
  double tau_;
  int horizon_ = 0;
};

// Bag of scorers over Poisson(1)-weighted replays of the history; the bag's
// empirical greedy-action distribution drives the play. With `uniform` set,
// every action is additionally smoothed by min(1/K, psi/(K*phat)).
// Approximates the bag-of-policies construction from its published
// description; the original implementation details are not public.
class Cover : public Explorer {
 public:
  Cover(bool uniform, int bag_size = 16, double psi = 0.1);
  std::string name() const override { return uniform_ ? "cover" : "cover-nu"; }
  void begin(int num_actions, int dim, int horizon,
             const LearnerSetup& setup) override;
  ActionDistribution distribution(const RoundView& view, Rng& rng) override;
  void observe(const Context& x, int action, double reward, double propensity,
               Rng& rng) override;

  std::vector<Scorer>& bag() { return bag_; }
  static ActionDistribution smooth(const std::vector<double>& bag_fractions,
                                   double psi);

 private:
  bool uniform_;
  int bag_size_;
  double psi_;
  double learning_rate_ = 0.1;
  std::vector<Scorer> bag_;
};

struct ExplorerParams {
  double eps = 0.0;
  double eps0 = 0.1;
  double eg_eta = 0.1;
  double alpha = 1.0;
  double tau = 0.02;
  int bag = 16;
  double psi = 0.1;
};

// Baseline names: epsilon-greedy, epsilon-decreasing, eg-greedy, linucb,
// tau-first, cover, cover-nu. The melee agent is constructed separately
// from a trained policy.
std::vector<std::string> baseline_explorer_names();
std::unique_ptr<Explorer> make_explorer(const std::string& name,
                                        const ExplorerParams& params);

}  // namespace melee
