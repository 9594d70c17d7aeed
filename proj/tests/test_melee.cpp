#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "melee/melee.hpp"

using namespace melee;

namespace {

MetaFeatures phi_for(const ActionDistribution& probs, int greedy, int t = 1,
                     int horizon = 10) {
  return extract(probs, greedy, {}, t, horizon);
}

ActionDistribution dist(std::vector<double> p) {
  ActionDistribution d;
  d.probabilities = std::move(p);
  return d;
}

// All rows identical: action 1 always pays 1, action 0 pays 0.
SupervisedDataset constant_reward_task(int n, std::uint64_t seed) {
  SupervisedDataset ds;
  ds.num_actions = 2;
  ds.dim = 2;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    ds.rows.push_back(
        {{{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)}}, {{0.0, 1.0}}});
  }
  return ds;
}

}  // namespace

TEST_CASE("pi_act: zero policy degenerates to action 0") {
  const ExplorationPolicy pi = ExplorationPolicy::zero(2);
  const MetaFeatures phi = phi_for(dist({0.2, 0.8}), 1);
  CHECK(pi_act(pi, phi) == 0);
}

TEST_CASE("pi_act: probability-copy policy follows the calibrated argmax") {
  ExplorationPolicy pi = ExplorationPolicy::zero(2);
  // regressor k reads the k-th calibrated probability (block offset 0)
  pi.weights[0 * pi.feature_len + 0] = 1.0;
  pi.weights[1 * pi.feature_len + 1] = 1.0;
  CHECK(pi_act(pi, phi_for(dist({0.8, 0.2}), 1)) == 0);
  CHECK(pi_act(pi, phi_for(dist({0.1, 0.9}), 0)) == 1);
}

TEST_CASE("pi_act: adding one constant to every bias leaves actions unchanged") {
  Rng rng(3);
  ExplorationPolicy pi = ExplorationPolicy::zero(3);
  for (double& w : pi.weights) w = rng.uniform(-1.0, 1.0);
  ExplorationPolicy shifted = pi;
  for (double& b : shifted.bias) b += 4.2;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> p = {rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0),
                             rng.uniform(0.1, 1.0)};
    const double total = p[0] + p[1] + p[2];
    for (double& v : p) v /= total;
    const MetaFeatures phi = phi_for(dist(p), trial % 3, 1 + trial, 60);
    CHECK(pi_act(pi, phi) == pi_act(shifted, phi));
  }
}

TEST_CASE("rollout_value returns the probed entry of the reward vector") {
  RewardVector rv{{0.0, 1.0}};
  CHECK(rollout_value(rv, 1) == 1.0);
  RewardVector rv2{{0.3, 0.7}};
  CHECK(rollout_value(rv2, 0) == 0.3);
  for (int a = 0; a < 2; ++a) CHECK(rollout_value(rv2, a) == rv2.rewards[a]);
  CHECK_THROWS_AS(rollout_value(rv, 2), ConfigError);
}

TEST_CASE("rollin distribution is uniform at mu = 1/K regardless of policy") {
  Rng rng(5);
  const MetaFeatures phi = phi_for(dist({0.9, 0.1}), 0);
  for (int trial = 0; trial < 10; ++trial) {
    ExplorationPolicy pi = ExplorationPolicy::zero(2);
    for (double& w : pi.weights) w = rng.uniform(-2.0, 2.0);
    const ActionDistribution d = rollin_distribution(pi, phi, 0.5);
    CHECK(d.probabilities[0] == doctest::Approx(0.5));
    CHECK(d.probabilities[1] == doctest::Approx(0.5));
  }
  // mu = 0: deterministic point mass on the policy's choice.
  ExplorationPolicy pi = ExplorationPolicy::zero(2);
  const ActionDistribution d = rollin_distribution(pi, phi, 0.0);
  CHECK(d.probabilities == std::vector<double>{1.0, 0.0});
}

TEST_CASE("train_melee: one round on a 2-row task leaves one meta-example") {
  SupervisedDataset task;
  task.num_actions = 2;
  task.dim = 1;
  task.rows.push_back({{{0.3}}, {{1.0, 0.0}}});
  task.rows.push_back({{{0.9}}, {{0.0, 1.0}}});

  MeleeConfig cfg;
  cfg.rounds = 1;
  cfg.n_val = 1;
  cfg.selection_tasks = 1;
  cfg.selection_task_size = 40;
  const TrainResult result = train_melee({task}, cfg, Rng(7));
  REQUIRE(result.meta_dataset.size() == 1);
  const MetaExample& ex = result.meta_dataset[0];
  const bool matches_row0 = ex.values == task.rows[0].r.rewards;
  const bool matches_row1 = ex.values == task.rows[1].r.rewards;
  CHECK((matches_row0 || matches_row1));
  CHECK(result.policies.size() == 1);
}

TEST_CASE("train_melee: aggregation is monotone across rounds") {
  const SupervisedDataset task = constant_reward_task(40, 11);
  MeleeConfig cfg;
  cfg.rounds = 3;
  cfg.n_val = 30;  // leaves 10 training rows per episode
  cfg.selection_tasks = 1;
  cfg.selection_task_size = 40;
  const TrainResult result = train_melee({task}, cfg, Rng(13));
  REQUIRE(result.progress.size() == 3);
  for (int n = 0; n < 3; ++n) {
    CHECK(result.progress[n].tr_rows == 10);
    CHECK(result.progress[n].meta_rows == static_cast<std::size_t>(10 * (n + 1)));
  }
  CHECK(result.meta_dataset.size() == 30);
}

TEST_CASE("train_melee: every roll-out vector equals the true reward vector") {
  // Constant-reward task: the expected vector is known for every row.
  const SupervisedDataset task = constant_reward_task(60, 17);
  MeleeConfig cfg;
  cfg.rounds = 2;
  cfg.n_val = 30;
  cfg.selection_tasks = 1;
  cfg.selection_task_size = 40;
  const TrainResult result = train_melee({task}, cfg, Rng(19));
  for (const MetaExample& ex : result.meta_dataset) {
    CHECK(ex.values == std::vector<double>{0.0, 1.0});
  }

  // One-hot synthetic task: the multiset of roll-out vectors must equal the
  // multiset of presented reward vectors.
  const SupervisedDataset synth = gen_synthetic({0.2, 45, 23});
  MeleeConfig cfg2 = cfg;
  cfg2.rounds = 1;
  const TrainResult r2 = train_melee({synth}, cfg2, Rng(29));
  REQUIRE(r2.meta_dataset.size() == 15);
  int ones = 0;
  for (const MetaExample& ex : r2.meta_dataset) {
    const bool is0 = ex.values == std::vector<double>{1.0, 0.0};
    const bool is1 = ex.values == std::vector<double>{0.0, 1.0};
    CHECK((is0 || is1));
    ones += is1;
  }
  CHECK(ones > 0);
  CHECK(ones < 15);
}

TEST_CASE("train_melee rejects tasks that cannot fill the validation split") {
  const SupervisedDataset tiny = constant_reward_task(20, 31);
  MeleeConfig cfg;
  cfg.n_val = 30;
  CHECK_THROWS_AS(train_melee({tiny}, cfg, Rng(1)), ConfigError);
  CHECK_THROWS_AS(train_melee({}, cfg, Rng(1)), ConfigError);
}

TEST_CASE("train_melee learns to prefer the always-paying action") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SupervisedDataset task = constant_reward_task(230, 100 + seed);
    MeleeConfig cfg;
    cfg.rounds = 1;  // one 200-round episode
    cfg.selection_tasks = 1;
    cfg.selection_task_size = 40;
    const TrainResult result = train_melee({task}, cfg, Rng(seed));
    const ExplorationPolicy& pi = result.policies.back();
    for (const MetaExample& ex : result.meta_dataset) {
      const std::vector<double> values = pi.values(ex.features);
      CHECK(values[1] > values[0]);
    }
  }
}

TEST_CASE("train_melee is deterministic under a fixed seed") {
  const SupervisedDataset task = gen_synthetic({0.15, 50, 37});
  MeleeConfig cfg;
  cfg.rounds = 2;
  cfg.n_val = 30;
  cfg.selection_tasks = 1;
  cfg.selection_task_size = 40;
  const TrainResult a = train_melee({task}, cfg, Rng(55));
  const TrainResult b = train_melee({task}, cfg, Rng(55));
  REQUIRE(a.policies.size() == b.policies.size());
  for (std::size_t i = 0; i < a.policies.size(); ++i) {
    CHECK(a.policies[i].weights == b.policies[i].weights);
    CHECK(a.policies[i].bias == b.policies[i].bias);
  }
  CHECK(a.selected == b.selected);
}

TEST_CASE("learn_policy recovers a linear value function") {
  Rng rng(77);
  const int K = 2;
  const int f = MetaFeatures::length(K);
  std::vector<double> true_w(K * f);
  for (double& w : true_w) w = rng.uniform(-0.5, 0.5);
  std::vector<MetaExample> data;
  for (int i = 0; i < 400; ++i) {
    std::vector<double> p = {rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)};
    const double total = p[0] + p[1];
    for (double& v : p) v /= total;
    std::vector<ArmObservation> past;
    for (int j = 0; j < i % 4; ++j) {
      past.push_back({rng.uniform_int(2), rng.uniform(0.0, 1.0), 1.0});
    }
    MetaExample ex;
    ex.features = extract(dist(p), rng.uniform_int(2), past, 1 + i % 9, 10);
    ex.values.resize(K);
    for (int k = 0; k < K; ++k) {
      double v = 0.0;
      for (int j = 0; j < f; ++j) v += true_w[k * f + j] * ex.features.values[j];
      ex.values[k] = std::clamp(0.5 + 0.1 * v, 0.0, 1.0);
    }
    data.push_back(std::move(ex));
  }
  const ExplorationPolicy pi = learn_policy(data, K, 1e-8);
  for (const MetaExample& ex : data) {
    const std::vector<double> got = pi.values(ex.features);
    for (int k = 0; k < K; ++k) {
      CHECK(std::fabs(got[k] - ex.values[k]) <= 1e-4);
    }
  }
}

TEST_CASE("run_agent: test_mu = 0 is deterministic with unit propensities") {
  const SupervisedDataset ds = gen_synthetic({0.1, 80, 41});
  const ExplorationPolicy pi = ExplorationPolicy::zero(2);
  const RunOutput out = run_agent(pi, PolOptMethod::direct, ds, 0.0, 9);
  CHECK(out.trace.rounds.size() == 50);  // 80 rows minus 30 held out
  for (const RoundRecord& rec : out.trace.rounds) {
    CHECK(rec.propensity == 1.0);
    CHECK(rec.action == rec.greedy);
  }
  CHECK(out.history.size() == 50);
}

TEST_CASE("run_agent: logged propensities take only the two mixture values") {
  // 10 actions, test_mu = 0.1: p in {0.01, 0.91} only.
  SupervisedDataset ds;
  ds.num_actions = 10;
  ds.dim = 2;
  Rng rng(43);
  for (int i = 0; i < 130; ++i) {
    std::vector<double> rewards(10, 0.0);
    rewards[rng.uniform_int(10)] = 1.0;
    ds.rows.push_back(
        {{{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)}}, {std::move(rewards)}});
  }
  const ExplorationPolicy pi = ExplorationPolicy::zero(10);
  const RunOutput out = run_agent(pi, PolOptMethod::direct, ds, 0.1, 47);
  REQUIRE(out.trace.rounds.size() == 100);
  for (std::size_t i = 0; i < out.trace.rounds.size(); ++i) {
    const RoundRecord& rec = out.trace.rounds[i];
    const bool explored = std::fabs(rec.propensity - 0.01) <= 1e-15;
    const bool greedy = std::fabs(rec.propensity - 0.91) <= 1e-15;
    CHECK((explored || greedy));
    CHECK(rec.propensity == out.history.records[i].propensity);
  }
}

TEST_CASE("probability-copy policy with test_mu reproduces epsilon-greedy") {
  // Stream with one repeated context and constant rewards keeps the raw
  // argmax and the calibrated argmax aligned, so the two agents must draw
  // identical actions and propensities from the same seed.
  SupervisedDataset ds;
  ds.num_actions = 2;
  ds.dim = 1;
  for (int i = 0; i < 90; ++i) ds.rows.push_back({{{1.0}}, {{1.0, 0.0}}});

  ExplorationPolicy copy = ExplorationPolicy::zero(2);
  copy.weights[0 * copy.feature_len + 0] = 1.0;
  copy.weights[1 * copy.feature_len + 1] = 1.0;

  const double eps = 0.05;
  const std::uint64_t seed = 71;
  const RunOutput via_policy = run_agent(copy, PolOptMethod::direct, ds, eps, seed);

  EpsilonGreedy baseline(eps);
  AgentConfig cfg;
  const RunOutput via_eps = run_bandit(bandit_stream(ds, seed), baseline, cfg,
                                       Rng(seed));
  REQUIRE(via_policy.trace.rounds.size() == via_eps.trace.rounds.size());
  for (std::size_t t = 0; t < via_policy.trace.rounds.size(); ++t) {
    CHECK(via_policy.trace.rounds[t].action == via_eps.trace.rounds[t].action);
    CHECK(via_policy.trace.rounds[t].propensity ==
          via_eps.trace.rounds[t].propensity);
    CHECK(via_policy.trace.rounds[t].greedy == via_eps.trace.rounds[t].greedy);
  }
}

TEST_CASE("policy json round trip") {
  Rng rng(83);
  ExplorationPolicy pi = ExplorationPolicy::zero(2);
  for (double& w : pi.weights) w = rng.uniform(-1.0, 1.0);
  for (double& b : pi.bias) b = rng.uniform(-1.0, 1.0);
  const ExplorationPolicy back = policy_from_json(policy_to_json(pi, MeleeConfig{}));
  CHECK(back.weights == pi.weights);
  CHECK(back.bias == pi.bias);
  CHECK(back.num_actions == 2);
}
