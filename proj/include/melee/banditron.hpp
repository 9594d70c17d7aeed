#pragma once

#include <functional>
#include <string>
#include <vector>

#include "melee/types.hpp"

namespace melee {
namespace banditron {

// Multiclass Perceptron under bandit feedback. Inputs are L2-normalized on
// entry so the norm bound holds as preprocessing rather than a rejection.
struct State {
  int num_actions = 0;  // K
  int dim = 0;          // D
  std::vector<double> weights;  // K x D, row-major
  long rounds = 0;
  long mistakes = 0;
  double edge_sum = 0.0;  // running sum of 1/(1 + K*gamma_t)

  static State zero(int num_actions, int dim);
  std::vector<double> scores(const Context& x) const;  // W x (x normalized)
  int predict(const Context& x) const;
};

// Optional exploration override: given the state, the (normalized) context
// and the argmax prediction, return the action the smoothing centers on.
// The plain Banditron passes the argmax straight through.
using PolicyFn = std::function<int(const State&, const Context&, int, Rng&)>;

// Q^mu(a) = mu + (1 - K*mu) * 1[a = center]; requires mu in (0, 1/(2K)).
ActionDistribution exploration_distribution(int center, double mu,
                                            int num_actions);

struct StepOutcome {
  int predicted = 0;  // argmax action
  int center = 0;     // action the smoothing centered on
  int sampled = 0;
  double reward = 0.0;
  double propensity = 0.0;
};

// One online round: predict, sample from Q^mu, observe the one-hot reward,
// apply the unbiased update, count the mistake if the argmax was wrong.
StepOutcome step(State& state, const PolicyFn* pi, const Context& x,
                 int true_label, double mu, Rng& rng);

// Multiclass hinge loss max_{a != a*} max{0, 1 - (Wx)_{a*} + (Wx)_a} for a
// one-hot reward vector.
double hinge_loss(const State& state, const Context& x, const RewardVector& rv);

// Edge statistics: gamma_t = Pr[pi correct] - Pr[f correct] per round and
// Gamma = mean of 1/(1 + K*gamma_t).
struct EdgeStats {
  std::vector<double> gamma;
  double big_gamma = 1.0;
};
EdgeStats edge_stats(
    const std::vector<std::pair<double, double>>& correctness_trace,
    int num_actions);

struct TraceRow {
  long t = 0;
  double mistake_rate = 0.0;
  double gamma = 0.0;
  double running_big_gamma = 1.0;
};

// Simulator-only oracle policy: when the argmax is wrong, it substitutes
// the true label with probability `correct_prob`. Its per-round correctness
// probabilities are known analytically, which is what feeds the edge stats.
struct OraclePolicy {
  double correct_prob = 0.5;
};

struct RunResult {
  State final_state;
  std::vector<TraceRow> rows;
  EdgeStats edges;
};

// Runs a labeled stream through the Banditron (pi == nullptr) or through
// the oracle-smoothed variant, collecting the per-round trace.
RunResult run_stream(const std::vector<std::pair<Context, int>>& stream,
                     int num_actions, double mu, const OraclePolicy* pi,
                     Rng rng);

// Per-round CSV: t, mistake_rate, gamma, running_Gamma.
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);

}  // namespace banditron
}  // namespace melee
