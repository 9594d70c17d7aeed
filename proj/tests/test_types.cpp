#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "melee/types.hpp"

using namespace melee;

TEST_CASE("mixture: deterministic limit at mu = 0") {
  const ActionDistribution d = mixture(0, 0.0, 4);
  CHECK(d.probabilities == std::vector<double>{1.0, 0.0, 0.0, 0.0});
}

TEST_CASE("mixture: direct formula at mu = 0.1, K = 10") {
  const ActionDistribution d = mixture(1, 0.1, 10);
  CHECK(d.probabilities[1] == doctest::Approx(0.91).epsilon(1e-15));
  for (int a = 0; a < 10; ++a) {
    if (a != 1) CHECK(d.probabilities[a] == doctest::Approx(0.01).epsilon(1e-15));
  }
}

TEST_CASE("mixture: uniform-mixture endpoint mu = 1/K") {
  const ActionDistribution d = mixture(0, 0.5, 2);
  CHECK(d.probabilities[0] == doctest::Approx(0.75));
  CHECK(d.probabilities[1] == doctest::Approx(0.25));
}

TEST_CASE("mixture rejects mu outside [0, 1/K]") {
  CHECK_THROWS_AS(mixture(0, 0.6, 2), ConfigError);
  CHECK_THROWS_AS(mixture(0, -0.01, 2), ConfigError);
  CHECK_THROWS_AS(mixture(2, 0.1, 2), ConfigError);
}

TEST_CASE("mixture mass identity (K-1)(mu/K) + (1-mu+mu/K) = 1") {
  for (int k : {2, 3, 5, 10, 32}) {
    for (double frac : {0.0, 0.1, 0.5, 0.99, 1.0}) {
      const double mu = frac / k;
      const ActionDistribution d = mixture(k - 1, mu, k);
      double total = 0.0;
      for (double p : d.probabilities) total += p;
      CHECK(std::fabs(total - 1.0) <= 1e-12);
      CHECK(d.is_valid());
    }
  }
}

TEST_CASE("smoothed point mass: uniform at mu = 1/K, point mass at mu = 0") {
  const ActionDistribution uniform = smoothed_point_mass(1, 0.5, 2);
  CHECK(uniform.probabilities[0] == doctest::Approx(0.5));
  CHECK(uniform.probabilities[1] == doctest::Approx(0.5));
  const ActionDistribution point = smoothed_point_mass(1, 0.0, 2);
  CHECK(point.probabilities == std::vector<double>{0.0, 1.0});
  const ActionDistribution q = smoothed_point_mass(0, 0.1, 4);
  CHECK(q.probabilities[0] == doctest::Approx(0.7));
  CHECK(q.probabilities[1] == doctest::Approx(0.1));
}

TEST_CASE("sample: point mass always returns the supported action") {
  ActionDistribution d;
  d.probabilities = {1.0, 0.0};
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto [a, p] = sample(d, rng);
    CHECK(a == 0);
    CHECK(p == 1.0);
  }
}

TEST_CASE("sample: empirical frequency tracks the mass") {
  // 0.91 head plus nine 0.01 tails
  ActionDistribution d;
  d.probabilities.assign(10, 0.01);
  d.probabilities[0] = 0.91;
  Rng rng(42);
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto [a, p] = sample(d, rng);
    CHECK(p == d.probabilities[a]);
    if (a == 0) ++hits;
  }
  CHECK(std::fabs(static_cast<double>(hits) / n - 0.91) <= 0.01);
}

TEST_CASE("sample: symmetric coin always logs propensity 0.5") {
  ActionDistribution d;
  d.probabilities = {0.5, 0.5};
  Rng rng(3);
  for (int i = 0; i < 200; ++i) CHECK(sample(d, rng).second == 0.5);
}

TEST_CASE("sample is reproducible under a fixed seed") {
  ActionDistribution d;
  d.probabilities = {0.2, 0.3, 0.5};
  std::vector<int> first, second;
  {
    Rng rng(99);
    for (int i = 0; i < 50; ++i) first.push_back(sample(d, rng).first);
  }
  {
    Rng rng(99);
    for (int i = 0; i < 50; ++i) second.push_back(sample(d, rng).first);
  }
  CHECK(first == second);
}

TEST_CASE("rng split is independent of draw order") {
  Rng parent(5);
  const Rng child_before = parent.split("stream");
  parent.uniform();
  parent.uniform();
  const Rng child_after = parent.split("stream");
  Rng a = child_before, b = child_after;
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("validation catches malformed values") {
  Context c;
  c.features = {1.0, std::nan("")};
  CHECK_THROWS_AS(c.validate(), DataError);
  RewardVector rv;
  rv.rewards = {0.5, 1.2};
  CHECK_THROWS_AS(rv.validate(), DataError);
  Interaction rec{{{0.0}}, 0, 0.5, 0.0};
  CHECK_THROWS_AS(rec.validate(2), DataError);
}

TEST_CASE("history ndjson round trip") {
  History h;
  h.append({{{0.25, -1.5}}, 1, 0.75, 0.91});
  h.append({{{2.0, 3.0}}, 0, 0.0, 0.01});
  const std::string path =
      (std::filesystem::temp_directory_path() / "melee_history_test.ndjson").string();
  write_history_ndjson(path, h);
  const History back = read_history_ndjson(path);
  REQUIRE(back.size() == 2);
  CHECK(back.records[0].context.features == h.records[0].context.features);
  CHECK(back.records[0].action == 1);
  CHECK(back.records[0].reward == 0.75);
  CHECK(back.records[0].propensity == 0.91);
  CHECK(back.records[1].action == 0);
  std::remove(path.c_str());
}
