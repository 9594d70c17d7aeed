#include "melee/melee.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "melee/kernels.hpp"

namespace melee {

namespace {

// Gaussian elimination with partial pivoting; a is n x n row-major.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> rhs,
                                int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    }
    if (std::fabs(a[pivot * n + col]) < 1e-300) {
      throw NumericError("learn_policy: singular normal equations");
    }
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
      std::swap(rhs[pivot], rhs[col]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] * inv;
      if (factor == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      rhs[r] -= factor * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double acc = rhs[r];
    for (int c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
    x[r] = acc / a[r * n + r];
  }
  return x;
}

}  // namespace

ExplorationPolicy ExplorationPolicy::zero(int num_actions) {
  ExplorationPolicy pi;
  pi.num_actions = num_actions;
  pi.feature_len = MetaFeatures::length(num_actions);
  pi.weights.assign(static_cast<std::size_t>(num_actions) * pi.feature_len, 0.0);
  pi.bias.assign(num_actions, 0.0);
  return pi;
}

std::vector<double> ExplorationPolicy::values(const MetaFeatures& phi) const {
  if (static_cast<int>(phi.values.size()) != feature_len) {
    throw DataError("exploration policy: meta-feature length mismatch");
  }
  std::vector<double> out(num_actions);
  kernels::matvec(weights.data(), phi.values.data(), out.data(), num_actions,
                  feature_len);
  for (int k = 0; k < num_actions; ++k) out[k] += bias[k];
  return out;
}

int ExplorationPolicy::act(const MetaFeatures& phi) const {
  return argmax_lowest(values(phi));
}

int pi_act(const ExplorationPolicy& pi, const MetaFeatures& phi) {
  return pi.act(phi);
}

double rollout_value(const RewardVector& rv, int action) {
  if (action < 0 || action >= rv.num_actions())
    throw ConfigError("rollout_value: action out of range");
  return rv.rewards[action];
}

ActionDistribution rollin_distribution(const ExplorationPolicy& pi,
                                       const MetaFeatures& phi, double mu) {
  return smoothed_point_mass(pi.act(phi), mu, pi.num_actions);
}

ExplorationPolicy learn_policy(const std::vector<MetaExample>& data,
                               int num_actions, double ridge) {
  ExplorationPolicy pi = ExplorationPolicy::zero(num_actions);
  if (data.empty()) return pi;
  const int f = pi.feature_len;
  const int n = f + 1;  // augmented bias column

  // Normal equations shared across the K regression targets.
  std::vector<double> gram(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<std::vector<double>> xty(num_actions, std::vector<double>(n, 0.0));
  std::vector<double> row(n);
  for (const auto& ex : data) {
    if (static_cast<int>(ex.features.values.size()) != f ||
        static_cast<int>(ex.values.size()) != num_actions) {
      throw DataError("learn_policy: inconsistent meta-example shapes");
    }
    std::copy(ex.features.values.begin(), ex.features.values.end(), row.begin());
    row[f] = 1.0;
    for (int i = 0; i < n; ++i) {
      kernels::axpy(row[i], row.data(), gram.data() + static_cast<std::size_t>(i) * n,
                    n);
    }
    for (int k = 0; k < num_actions; ++k) {
      kernels::axpy(ex.values[k], row.data(), xty[k].data(), n);
    }
  }
  // The probability and one-hot blocks are exact simplexes, so the Gram
  // matrix is rank deficient without the ridge. Bias stays unpenalized.
  for (int i = 0; i < f; ++i) gram[static_cast<std::size_t>(i) * n + i] += ridge;

  for (int k = 0; k < num_actions; ++k) {
    const std::vector<double> beta = solve_dense(gram, xty[k], n);
    std::copy(beta.begin(), beta.begin() + f,
              pi.weights.begin() + static_cast<std::size_t>(k) * f);
    pi.bias[k] = beta[f];
  }
  return pi;
}

namespace {

MetaFeatures features_for_round(const Scorer& f, const Context& x,
                                const History& h, int t, int horizon) {
  return extract(f.predict_proba(x), f.predict(x), observations(h), t, horizon);
}

}  // namespace

TrainResult train_melee(const std::vector<SupervisedDataset>& tasks,
                        const MeleeConfig& cfg, Rng rng) {
  if (tasks.empty()) throw ConfigError("train_melee: need at least one task");
  if (cfg.rounds < 1) throw ConfigError("train_melee: need at least one round");
  const int K = tasks.front().num_actions;
  if (!(cfg.mu >= 0.0 && cfg.mu <= 1.0 / K))
    throw ConfigError("train_melee: mu must lie in [0, 1/K]");
  for (const auto& task : tasks) {
    task.validate();
    if (task.num_actions != K)
      throw ConfigError("train_melee: tasks must share one action count");
    if (static_cast<int>(task.size()) <= cfg.n_val) {
      throw ConfigError("train_melee: every task needs more than n_val rows");
    }
  }

  TrainResult result;
  std::vector<MetaExample>& aggregated = result.meta_dataset;
  ExplorationPolicy current = ExplorationPolicy::zero(K);
  const double probe_propensity = 1.0 - (K - 1) * cfg.mu;

  for (int n = 1; n <= cfg.rounds; ++n) {
    Rng episode_rng = rng.split("episode").split(static_cast<std::uint64_t>(n));
    const int task_index = episode_rng.split("pick").uniform_int(
        static_cast<int>(tasks.size()));
    const SupervisedDataset& task = tasks[task_index];

    // Permute, then split off the validation block.
    std::vector<LabeledExample> rows = task.rows;
    episode_rng.split("permute").shuffle(rows);
    SupervisedDataset val;
    val.num_actions = K;
    val.dim = task.dim;
    val.rows.assign(rows.begin(), rows.begin() + cfg.n_val);
    std::vector<LabeledExample> tr(rows.begin() + cfg.n_val, rows.end());
    const int horizon = static_cast<int>(tr.size());

    // Toy tasks can leave fewer validation rows than 3-fold CV needs.
    const HyperParams hp = static_cast<int>(val.rows.size()) >= 6
                               ? select_hyperparams(val)
                               : HyperParams{ScalingMode::standardize, 0.1};
    FeatureScaler scaler = FeatureScaler::fit(hp.scaling, val.rows, task.dim);
    PolOptConfig opt_cfg;
    opt_cfg.method = cfg.method;
    opt_cfg.learning_rate = hp.learning_rate;
    IncrementalPolOpt opt(opt_cfg, scaler, K, task.dim);

    Rng rollin_rng = episode_rng.split("rollin");
    History h;
    double episode_reward = 0.0;
    for (int t = 1; t <= horizon; ++t) {
      const LabeledExample& row = tr[t - 1];

      // Counterfactual probes: pretend each action was appended to the
      // history. The trained probe scorer feeds multi-step roll-outs in the
      // general scheme; with the one-step expert its value estimate is the
      // true reward itself. The real scorer is never touched.
      std::vector<double> rho(K);
      for (int a = 0; a < K; ++a) {
        const Interaction probe_rec{row.x, a, row.r.rewards[a], probe_propensity};
        const Scorer probed = opt.probe(probe_rec);
        (void)probed;
        rho[a] = rollout_value(row.r, a);
      }

      if ((t - 1) % cfg.calibration_period == 0) {
        opt.scorer().fit_calibration(val);
      }
      const MetaFeatures phi =
          features_for_round(opt.scorer(), row.x, h, t, horizon);
      aggregated.push_back({phi, rho});

      const ActionDistribution rollin = rollin_distribution(current, phi, cfg.mu);
      const auto [action, propensity] = sample(rollin, rollin_rng);
      const double reward = row.r.rewards[action];
      episode_reward += reward;
      h.append({row.x, action, reward, propensity});
      opt.observe(h.records.back());
    }

    current = learn_policy(aggregated, K, cfg.ridge);
    result.policies.push_back(current);
    result.progress.push_back({n, task_index, horizon, aggregated.size(),
                               horizon > 0 ? episode_reward / horizon : 0.0});
  }

  // Pick the policy with the best mean progressive reward on held-out
  // tasks. Synthetic tasks are binary; for other action counts fall back to
  // re-permuted training tasks.
  std::vector<SupervisedDataset> eval_tasks;
  Rng selection_rng = rng.split("selection");
  if (K == 2) {
    eval_tasks = sample_training_suite(cfg.selection_tasks,
                                       cfg.selection_task_size, selection_rng);
  } else {
    for (int i = 0; i < cfg.selection_tasks; ++i) {
      eval_tasks.push_back(tasks[i % tasks.size()]);
    }
  }
  result.selection_returns.assign(result.policies.size(), 0.0);
  int best = 0;
  for (std::size_t p = 0; p < result.policies.size(); ++p) {
    double total = 0.0;
    for (std::size_t e = 0; e < eval_tasks.size(); ++e) {
      const std::uint64_t run_seed = selection_rng.split("run").split(e).seed();
      const RunOutput out =
          run_agent(result.policies[p], cfg.method, eval_tasks[e], cfg.test_mu,
                    run_seed);
      double g = 0.0;
      for (const auto& r : out.trace.rounds) g += r.reward;
      total += out.trace.rounds.empty() ? 0.0 : g / out.trace.rounds.size();
    }
    result.selection_returns[p] = total / eval_tasks.size();
    if (result.selection_returns[p] > result.selection_returns[best]) {
      best = static_cast<int>(p);
    }
  }
  result.selected = best;
  return result;
}

std::vector<double> RunTrace::rewards() const {
  std::vector<double> out;
  out.reserve(rounds.size());
  for (const auto& r : rounds) out.push_back(r.reward);
  return out;
}

RunOutput run_bandit(const BanditStream& stream, Explorer& explorer,
                     const AgentConfig& cfg, Rng rng) {
  const int K = stream.rounds.num_actions;
  const int dim = stream.rounds.dim;
  const int horizon = static_cast<int>(stream.rounds.size());
  if (horizon == 0) throw ConfigError("run_bandit: stream has no rounds");

  const HyperParams hp = select_hyperparams(stream.calibration);
  FeatureScaler scaler =
      FeatureScaler::fit(hp.scaling, stream.calibration.rows, dim);

  LearnerSetup setup{scaler, hp.learning_rate, cfg.method};
  explorer.begin(K, dim, horizon, setup);

  PolOptConfig opt_cfg;
  opt_cfg.method = cfg.method;
  opt_cfg.learning_rate = hp.learning_rate;
  IncrementalPolOpt opt(opt_cfg, scaler, K, dim);

  Rng agent_rng = rng.split("agent");
  RunOutput out;
  out.hyperparams = hp;
  out.trace.rounds.reserve(horizon);
  for (int t = 1; t <= horizon; ++t) {
    const LabeledExample& row = stream.rounds.rows[t - 1];
    if ((t - 1) % cfg.calibration_period == 0) {
      opt.scorer().fit_calibration(stream.calibration);
    }
    const RoundView view{opt.scorer(), row.x, out.history, t, horizon};
    const ActionDistribution dist = explorer.distribution(view, agent_rng);
    dist.validate();
    const auto [action, propensity] = sample(dist, agent_rng);
    const double reward = row.r.rewards[action];
    out.trace.rounds.push_back(
        {action, argmax_lowest(dist.probabilities), reward, propensity});
    out.history.append({row.x, action, reward, propensity});
    explorer.observe(row.x, action, reward, propensity, agent_rng);
    opt.observe(out.history.records.back());
  }
  return out;
}

PolicyExplorer::PolicyExplorer(ExplorationPolicy policy, double test_mu)
    : policy_(std::move(policy)), test_mu_(test_mu) {}

ActionDistribution PolicyExplorer::distribution(const RoundView& view, Rng&) {
  const MetaFeatures phi = features_for_round(view.scorer, view.x, view.history,
                                              view.t, view.horizon);
  return mixture(policy_.act(phi), test_mu_, view.scorer.num_actions);
}

RunOutput run_agent(const ExplorationPolicy& pi, PolOptMethod method,
                    const SupervisedDataset& dataset, double test_mu,
                    std::uint64_t seed) {
  const BanditStream stream = bandit_stream(dataset, seed);
  PolicyExplorer explorer(pi, test_mu);
  AgentConfig cfg;
  cfg.method = method;
  return run_bandit(stream, explorer, cfg, Rng(seed));
}

std::string policy_to_json(const ExplorationPolicy& pi, const MeleeConfig& cfg) {
  nlohmann::json j;
  j["version"] = 1;
  j["K"] = pi.num_actions;
  j["feature_len"] = pi.feature_len;
  j["weights"] = pi.weights;
  j["bias"] = pi.bias;
  j["config"] = {{"mu", cfg.mu},
                 {"n_val", cfg.n_val},
                 {"rounds", cfg.rounds},
                 {"test_mu", cfg.test_mu},
                 {"method", polopt_method_name(cfg.method)}};
  return j.dump(2);
}

ExplorationPolicy policy_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("policy JSON parse failure: ") + e.what());
  }
  if (j.at("version").get<int>() != 1) throw DataError("unsupported policy version");
  ExplorationPolicy pi;
  pi.num_actions = j.at("K").get<int>();
  pi.feature_len = j.at("feature_len").get<int>();
  pi.weights = j.at("weights").get<std::vector<double>>();
  pi.bias = j.at("bias").get<std::vector<double>>();
  if (pi.feature_len != MetaFeatures::length(pi.num_actions) ||
      static_cast<int>(pi.weights.size()) != pi.num_actions * pi.feature_len ||
      static_cast<int>(pi.bias.size()) != pi.num_actions) {
    throw DataError("policy JSON has inconsistent shapes");
  }
  return pi;
}

void save_policy(const std::string& path, const ExplorationPolicy& pi,
                 const MeleeConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << policy_to_json(pi, cfg) << '\n';
}

ExplorationPolicy load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return policy_from_json(ss.str());
}

void write_training_log(const std::string& path, const TrainResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const auto& p : result.progress) {
    nlohmann::json line = {{"round", p.round},
                           {"task", p.task_index},
                           {"tr_rows", p.tr_rows},
                           {"meta_rows", p.meta_rows},
                           {"episode_return", p.episode_return}};
    out << line.dump() << '\n';
  }
  nlohmann::json tail = {{"selected", result.selected},
                         {"selection_returns", result.selection_returns}};
  out << tail.dump() << '\n';
}

}  // namespace melee
