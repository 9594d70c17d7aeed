#include "melee/banditron.hpp"

#include <cmath>
#include <fstream>

#include "melee/kernels.hpp"

namespace melee {
namespace banditron {

namespace {

Context normalized(const Context& x) {
  const double norm =
      std::sqrt(kernels::dot(x.features.data(), x.features.data(), x.features.size()));
  if (norm <= 1.0) return x;
  Context out = x;
  for (double& v : out.features) v /= norm;
  return out;
}

}  // namespace

State State::zero(int num_actions, int dim) {
  State s;
  s.num_actions = num_actions;
  s.dim = dim;
  s.weights.assign(static_cast<std::size_t>(num_actions) * dim, 0.0);
  return s;
}

std::vector<double> State::scores(const Context& x) const {
  const Context z = normalized(x);
  std::vector<double> out(num_actions);
  kernels::matvec(weights.data(), z.features.data(), out.data(), num_actions, dim);
  return out;
}

int State::predict(const Context& x) const { return argmax_lowest(scores(x)); }

ActionDistribution exploration_distribution(int center, double mu,
                                            int num_actions) {
  if (!(mu > 0.0 && mu < 1.0 / (2.0 * num_actions)))
    throw ConfigError("banditron: mu must lie in (0, 1/(2K))");
  ActionDistribution q;
  q.probabilities.assign(num_actions, mu);
  q.probabilities[center] += 1.0 - num_actions * mu;
  return q;
}

StepOutcome step(State& state, const PolicyFn* pi, const Context& x,
                 int true_label, double mu, Rng& rng) {
  if (true_label < 0 || true_label >= state.num_actions)
    throw DataError("banditron: label out of range");
  const Context z = normalized(x);
  std::vector<double> raw(state.num_actions);
  kernels::matvec(state.weights.data(), z.features.data(), raw.data(),
                  state.num_actions, state.dim);
  const int predicted = argmax_lowest(raw);
  const int center = pi ? (*pi)(state, z, predicted, rng) : predicted;

  const ActionDistribution q = exploration_distribution(center, mu, state.num_actions);
  const auto [sampled, propensity] = sample(q, rng);
  const double reward = sampled == true_label ? 1.0 : 0.0;

  // U~ rows: x * (1[r=1] 1[a=a'] / Q(a') - 1[predicted = a'])
  for (int a = 0; a < state.num_actions; ++a) {
    double coeff = 0.0;
    if (reward == 1.0 && sampled == a) coeff += 1.0 / q.probabilities[a];
    if (predicted == a) coeff -= 1.0;
    if (coeff != 0.0) {
      kernels::axpy(coeff, z.features.data(),
                    state.weights.data() + static_cast<std::size_t>(a) * state.dim,
                    state.dim);
    }
  }

  state.rounds += 1;
  if (predicted != true_label) state.mistakes += 1;
  return {predicted, center, sampled, reward, propensity};
}

double hinge_loss(const State& state, const Context& x, const RewardVector& rv) {
  int best = -1;
  for (int a = 0; a < rv.num_actions(); ++a) {
    const double r = rv.rewards[a];
    if (r == 1.0) {
      if (best >= 0) throw DataError("hinge_loss: reward vector must be one-hot");
      best = a;
    } else if (r != 0.0) {
      throw DataError("hinge_loss: reward vector must be one-hot");
    }
  }
  if (best < 0) throw DataError("hinge_loss: reward vector must be one-hot");
  const std::vector<double> raw = state.scores(x);
  double worst = 0.0;
  for (int a = 0; a < state.num_actions; ++a) {
    if (a == best) continue;
    worst = std::max(worst, 1.0 - raw[best] + raw[a]);
  }
  return worst;
}

EdgeStats edge_stats(
    const std::vector<std::pair<double, double>>& correctness_trace,
    int num_actions) {
  EdgeStats stats;
  stats.gamma.reserve(correctness_trace.size());
  double total = 0.0;
  for (const auto& [pi_correct, f_correct] : correctness_trace) {
    if (!(pi_correct >= 0.0 && pi_correct <= 1.0 && f_correct >= 0.0 &&
          f_correct <= 1.0)) {
      throw DataError("edge_stats: probabilities must lie in [0,1]");
    }
    const double gamma = pi_correct - f_correct;
    stats.gamma.push_back(gamma);
    total += 1.0 / (1.0 + num_actions * gamma);
  }
  stats.big_gamma =
      correctness_trace.empty() ? 1.0 : total / correctness_trace.size();
  return stats;
}

RunResult run_stream(const std::vector<std::pair<Context, int>>& stream,
                     int num_actions, double mu, const OraclePolicy* pi,
                     Rng rng) {
  if (stream.empty()) throw DataError("banditron: empty stream");
  RunResult result;
  result.final_state = State::zero(num_actions, stream.front().first.dim());
  State& state = result.final_state;

  PolicyFn oracle_fn;
  const PolicyFn* fn = nullptr;
  int current_label = -1;
  if (pi) {
    oracle_fn = [&current_label, q = pi->correct_prob](const State&, const Context&,
                                                       int predicted, Rng& r) {
      if (predicted == current_label) return predicted;
      return r.bernoulli(q) ? current_label : predicted;
    };
    fn = &oracle_fn;
  }

  std::vector<std::pair<double, double>> correctness;
  correctness.reserve(stream.size());
  result.rows.reserve(stream.size());
  for (const auto& [x, label] : stream) {
    current_label = label;
    const StepOutcome out = step(state, fn, x, label, mu, rng);
    const double f_correct = out.predicted == label ? 1.0 : 0.0;
    const double pi_correct =
        pi ? (f_correct == 1.0 ? 1.0 : pi->correct_prob) : f_correct;
    correctness.emplace_back(pi_correct, f_correct);
    const double gamma = pi_correct - f_correct;
    state.edge_sum += 1.0 / (1.0 + num_actions * gamma);
    result.rows.push_back({state.rounds,
                           static_cast<double>(state.mistakes) / state.rounds,
                           gamma, state.edge_sum / state.rounds});
  }
  result.edges = edge_stats(correctness, num_actions);
  return result;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "t,mistake_rate,gamma,running_Gamma\n";
  char buf[96];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g\n", row.t,
                  row.mistake_rate, row.gamma, row.running_big_gamma);
    out << buf;
  }
}

}  // namespace banditron
}  // namespace melee
