#include "melee/types.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace melee {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw DataError(std::string(what) + " contains a non-finite entry");
  }
}

}  // namespace

void Context::validate() const {
  if (features.empty()) throw DataError("context must have at least one feature");
  require_finite(features, "context");
}

int RewardVector::best_action() const { return argmax_lowest(rewards); }

void RewardVector::validate() const {
  if (rewards.size() < 2) throw DataError("reward vector needs at least two actions");
  for (double r : rewards) {
    if (!(r >= 0.0 && r <= 1.0)) throw DataError("reward outside [0,1]");
  }
}

void Interaction::validate(int num_actions) const {
  context.validate();
  if (action < 0 || action >= num_actions) throw DataError("logged action out of range");
  if (!(reward >= 0.0 && reward <= 1.0)) throw DataError("logged reward outside [0,1]");
  if (!(propensity > 0.0 && propensity <= 1.0)) throw DataError("propensity must be in (0,1]");
}

void SupervisedDataset::validate() const {
  if (rows.empty()) throw DataError("dataset is empty");
  if (num_actions < 2) throw DataError("dataset needs at least two actions");
  if (dim < 1) throw DataError("dataset needs at least one feature");
  for (const auto& row : rows) {
    if (row.x.dim() != dim) throw DataError("inhomogeneous context dimension");
    if (row.r.num_actions() != num_actions) throw DataError("inhomogeneous action count");
    row.x.validate();
    row.r.validate();
  }
}

bool ActionDistribution::is_valid(double tol) const {
  if (probabilities.empty()) return false;
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    total += p;
  }
  return std::fabs(total - 1.0) <= tol;
}

void ActionDistribution::validate(double tol) const {
  if (!is_valid(tol)) throw NumericError("invalid action distribution");
}

ActionDistribution mixture(int greedy_action, double mu, int num_actions) {
  if (num_actions < 1) throw ConfigError("mixture: need at least one action");
  if (greedy_action < 0 || greedy_action >= num_actions)
    throw ConfigError("mixture: greedy action out of range");
  if (!(mu >= 0.0 && mu <= 1.0 / num_actions))
    throw ConfigError("mixture: mu must lie in [0, 1/K]");
  ActionDistribution dist;
  dist.probabilities.assign(num_actions, mu / num_actions);
  dist.probabilities[greedy_action] = 1.0 - mu + mu / num_actions;
  return dist;
}

ActionDistribution smoothed_point_mass(int greedy_action, double mu,
                                       int num_actions) {
  if (num_actions < 1) throw ConfigError("smoothed_point_mass: need at least one action");
  if (greedy_action < 0 || greedy_action >= num_actions)
    throw ConfigError("smoothed_point_mass: greedy action out of range");
  if (!(mu >= 0.0 && mu <= 1.0 / num_actions))
    throw ConfigError("smoothed_point_mass: mu must lie in [0, 1/K]");
  ActionDistribution dist;
  dist.probabilities.assign(num_actions, mu);
  dist.probabilities[greedy_action] += 1.0 - num_actions * mu;
  return dist;
}

std::pair<int, double> sample(const ActionDistribution& dist, Rng& rng) {
  dist.validate();
  const auto& p = dist.probabilities;
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    cum += p[a];
    if (u < cum) return {static_cast<int>(a), p[a]};
  }
  // u landed in the rounding slack past the last cumulative edge; return the
  // last action with positive mass so the propensity stays truthful.
  for (std::size_t a = p.size(); a-- > 0;) {
    if (p[a] > 0.0) return {static_cast<int>(a), p[a]};
  }
  throw NumericError("sample: distribution has no positive mass");
}

int argmax_lowest(const std::vector<double>& values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void write_history_ndjson(const std::string& path, const History& h) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const auto& rec : h.records) {
    nlohmann::json line;
    line["x"] = rec.context.features;
    line["a"] = rec.action;
    line["r"] = rec.reward;
    line["p"] = rec.propensity;
    out << line.dump() << '\n';
  }
}

History read_history_ndjson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  History h;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    Interaction it;
    it.context.features = rec.at("x").get<std::vector<double>>();
    it.action = rec.at("a").get<int>();
    it.reward = rec.at("r").get<double>();
    it.propensity = rec.at("p").get<double>();
    h.append(std::move(it));
  }
  return h;
}

}  // namespace melee
