#include "melee/explorers.hpp"

#include <algorithm>
#include <cmath>

#include "melee/kernels.hpp"

namespace melee {

ActionDistribution epsilon_greedy_distribution(int greedy_action, double eps,
                                               int num_actions) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw ConfigError("epsilon must lie in [0,1]");
  if (greedy_action < 0 || greedy_action >= num_actions)
    throw ConfigError("greedy action out of range");
  ActionDistribution dist;
  dist.probabilities.assign(num_actions, eps / num_actions);
  dist.probabilities[greedy_action] += 1.0 - eps;
  return dist;
}

EpsilonGreedy::EpsilonGreedy(double eps) : eps_(eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("epsilon must lie in [0,1]");
}

ActionDistribution EpsilonGreedy::distribution(const RoundView& view, Rng&) {
  return epsilon_greedy_distribution(view.scorer.predict(view.x), eps_,
                                     view.scorer.num_actions);
}

EpsilonDecreasing::EpsilonDecreasing(double eps0) : eps0_(eps0) {
  if (!(eps0 > 0.0 && eps0 <= 1.0)) throw ConfigError("eps0 must lie in (0,1]");
}

double EpsilonDecreasing::epsilon_at(double eps0, int t) {
  if (t < 1) throw ConfigError("epsilon-decreasing needs t >= 1");
  return std::min(1.0, eps0 / t);
}

ActionDistribution EpsilonDecreasing::distribution(const RoundView& view, Rng&) {
  return epsilon_greedy_distribution(view.scorer.predict(view.x),
                                     epsilon_at(eps0_, view.t),
                                     view.scorer.num_actions);
}

ExponentiatedGradientGreedy::ExponentiatedGradientGreedy(double eta) : eta_(eta) {
  if (!(eta > 0.0)) throw ConfigError("eg-greedy needs eta > 0");
  for (int i = 1; i <= 10; ++i) candidates_.push_back(0.05 * i + 0.01);
  weights_.assign(candidates_.size(), 1.0 / candidates_.size());
}

void ExponentiatedGradientGreedy::begin(int num_actions, int, int,
                                        const LearnerSetup&) {
  num_actions_ = num_actions;
  weights_.assign(candidates_.size(), 1.0 / candidates_.size());
  last_greedy_ = -1;
}

ActionDistribution ExponentiatedGradientGreedy::distribution(const RoundView& view,
                                                             Rng& rng) {
  last_greedy_ = view.scorer.predict(view.x);
  ActionDistribution over_candidates;
  over_candidates.probabilities = weights_;
  const int j = sample(over_candidates, rng).first;
  return epsilon_greedy_distribution(last_greedy_, candidates_[j],
                                     view.scorer.num_actions);
}

void ExponentiatedGradientGreedy::observe(const Context&, int action,
                                          double reward, double, Rng&) {
  if (last_greedy_ < 0) throw StateError("eg-greedy observed before acting");
  const int K = num_actions_;
  // Candidate j would have played `action` with probability p_j; the action
  // actually came from the weight mixture, so that is the IPS denominator.
  std::vector<double> p(candidates_.size());
  double p_mix = 0.0;
  for (std::size_t j = 0; j < candidates_.size(); ++j) {
    const double eps = candidates_[j];
    p[j] = eps / K + (action == last_greedy_ ? 1.0 - eps : 0.0);
    p_mix += weights_[j] * p[j];
  }
  double total = 0.0;
  for (std::size_t j = 0; j < candidates_.size(); ++j) {
    const double estimate = reward * p[j] / p_mix;
    weights_[j] *= std::exp(eta_ * estimate);
    total += weights_[j];
  }
  for (double& w : weights_) w /= total;
}

LinUcb::LinUcb(double alpha, int diagonal_threshold)
    : alpha_(alpha), diagonal_threshold_(diagonal_threshold) {
  if (!(alpha > 0.0)) throw ConfigError("linucb needs alpha > 0");
}

void LinUcb::begin(int num_actions, int dim, int, const LearnerSetup& setup) {
  num_actions_ = num_actions;
  dim_ = dim;
  scaler_ = setup.scaler;
  diagonal_ = dim > diagonal_threshold_;
  a_inv_.clear();
  a_diag_.clear();
  b_.assign(num_actions, std::vector<double>(dim, 0.0));
  if (diagonal_) {
    a_diag_.assign(num_actions, std::vector<double>(dim, 1.0));
  } else {
    std::vector<double> eye(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int d = 0; d < dim; ++d) eye[static_cast<std::size_t>(d) * dim + d] = 1.0;
    a_inv_.assign(num_actions, eye);
  }
}

std::vector<double> LinUcb::upper_bounds(const Context& x) const {
  if (b_.empty()) throw StateError("linucb used before begin()");
  const std::vector<double> z = scaler_.transform(x);
  std::vector<double> ucb(num_actions_);
  std::vector<double> tmp(dim_);
  for (int k = 0; k < num_actions_; ++k) {
    double mean = 0.0;
    double quad = 0.0;
    if (diagonal_) {
      for (int d = 0; d < dim_; ++d) {
        const double inv = 1.0 / a_diag_[k][d];
        mean += b_[k][d] * inv * z[d];
        quad += z[d] * inv * z[d];
      }
    } else {
      kernels::matvec(a_inv_[k].data(), z.data(), tmp.data(), dim_, dim_);
      mean = kernels::dot(b_[k].data(), tmp.data(), dim_);
      quad = kernels::dot(z.data(), tmp.data(), dim_);
    }
    ucb[k] = mean + alpha_ * std::sqrt(std::max(quad, 0.0));
  }
  return ucb;
}

ActionDistribution LinUcb::distribution(const RoundView& view, Rng&) {
  const std::vector<double> ucb = upper_bounds(view.x);
  ActionDistribution dist;
  dist.probabilities.assign(num_actions_, 0.0);
  dist.probabilities[argmax_lowest(ucb)] = 1.0;
  return dist;
}

void LinUcb::observe(const Context& x, int action, double reward, double, Rng&) {
  const std::vector<double> z = scaler_.transform(x);
  kernels::axpy(reward, z.data(), b_[action].data(), dim_);
  if (diagonal_) {
    for (int d = 0; d < dim_; ++d) a_diag_[action][d] += z[d] * z[d];
    return;
  }
  // Sherman-Morrison on the inverse: A += z z^T.
  std::vector<double> az(dim_);
  kernels::matvec(a_inv_[action].data(), z.data(), az.data(), dim_, dim_);
  const double denom = 1.0 + kernels::dot(z.data(), az.data(), dim_);
  kernels::ger(-1.0 / denom, az.data(), az.data(), a_inv_[action].data(), dim_, dim_);
}

TauFirst::TauFirst(double tau) : tau_(tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0,1]");
}

void TauFirst::begin(int, int, int horizon, const LearnerSetup&) {
  if (horizon < 1) throw ConfigError("tau-first needs a known horizon");
  horizon_ = horizon;
}

ActionDistribution TauFirst::distribution(const RoundView& view, Rng&) {
  if (horizon_ < 1) throw ConfigError("tau-first needs a known horizon");
  const int K = view.scorer.num_actions;
  if (static_cast<double>(view.t) <= tau_ * horizon_) {
    ActionDistribution uniform;
    uniform.probabilities.assign(K, 1.0 / K);
    return uniform;
  }
  ActionDistribution dist;
  dist.probabilities.assign(K, 0.0);
  dist.probabilities[view.scorer.predict(view.x)] = 1.0;
  return dist;
}

Cover::Cover(bool uniform, int bag_size, double psi)
    : uniform_(uniform), bag_size_(bag_size), psi_(psi) {
  if (bag_size < 1) throw ConfigError("cover needs a positive bag size");
  if (!(psi > 0.0)) throw ConfigError("cover needs psi > 0");
}

void Cover::begin(int num_actions, int dim, int, const LearnerSetup& setup) {
  learning_rate_ = setup.learning_rate;
  bag_.clear();
  for (int i = 0; i < bag_size_; ++i) {
    bag_.push_back(Scorer::zero(num_actions, dim, setup.scaler));
  }
}

ActionDistribution Cover::smooth(const std::vector<double>& bag_fractions,
                                 double psi) {
  const int K = static_cast<int>(bag_fractions.size());
  ActionDistribution dist;
  dist.probabilities.resize(K);
  double total = 0.0;
  for (int a = 0; a < K; ++a) {
    const double phat = bag_fractions[a];
    const double bonus =
        phat > 0.0 ? std::min(1.0 / K, psi / (K * phat)) : 1.0 / K;
    dist.probabilities[a] = phat + bonus;
    total += dist.probabilities[a];
  }
  for (double& p : dist.probabilities) p /= total;
  return dist;
}

ActionDistribution Cover::distribution(const RoundView& view, Rng&) {
  if (bag_.empty()) throw StateError("cover used before begin()");
  const int K = view.scorer.num_actions;
  std::vector<double> fractions(K, 0.0);
  for (const Scorer& member : bag_) fractions[member.predict(view.x)] += 1.0;
  for (double& f : fractions) f /= bag_.size();
  if (uniform_) return smooth(fractions, psi_);
  ActionDistribution dist;
  dist.probabilities = std::move(fractions);
  return dist;
}

void Cover::observe(const Context& x, int action, double reward, double, Rng& rng) {
  if (bag_.empty()) throw StateError("cover used before begin()");
  Interaction rec{x, action, reward, 1.0};
  const DirectTargets dt = direct_targets(rec, bag_.front().num_actions);
  for (Scorer& member : bag_) {
    const int replays = rng.poisson(1.0);
    for (int c = 0; c < replays; ++c) {
      member.sgd_update(x, dt.targets, dt.mask, learning_rate_);
    }
  }
}

std::vector<std::string> baseline_explorer_names() {
  return {"epsilon-greedy", "epsilon-decreasing", "eg-greedy", "linucb",
          "tau-first",      "cover",              "cover-nu"};
}

std::unique_ptr<Explorer> make_explorer(const std::string& name,
                                        const ExplorerParams& params) {
  if (name == "epsilon-greedy") return std::make_unique<EpsilonGreedy>(params.eps);
  if (name == "epsilon-decreasing")
    return std::make_unique<EpsilonDecreasing>(params.eps0);
  if (name == "eg-greedy")
    return std::make_unique<ExponentiatedGradientGreedy>(params.eg_eta);
  if (name == "linucb") return std::make_unique<LinUcb>(params.alpha);
  if (name == "tau-first") return std::make_unique<TauFirst>(params.tau);
  if (name == "cover") return std::make_unique<Cover>(true, params.bag, params.psi);
  if (name == "cover-nu")
    return std::make_unique<Cover>(false, params.bag, params.psi);
  std::string known;
  for (const auto& n : baseline_explorer_names()) known += " " + n;
  throw ConfigError("unknown explorer '" + name + "'; valid names:" + known +
                    " melee");
}

}  // namespace melee
