#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "melee/scorer.hpp"
#include "melee/types.hpp"

namespace melee {

// Reductions from logged bandit feedback to supervised regression.
enum class PolOptMethod { direct, ips };

std::string polopt_method_name(PolOptMethod m);
PolOptMethod polopt_method_from_name(const std::string& name);

// Inverse-propensity targets: zero except the logged action, which gets r/p.
std::vector<double> ips_targets(const Interaction& rec, int num_actions);

// Direct method: regress only the observed entry (mask gates the loss).
struct DirectTargets {
  std::vector<double> targets;
  std::vector<double> mask;
};
DirectTargets direct_targets(const Interaction& rec, int num_actions);

struct PolOptConfig {
  PolOptMethod method = PolOptMethod::direct;
  double learning_rate = 0.1;
  bool full_refit = false;
  int epochs = 5;             // full-refit passes over the reduction
  std::uint64_t seed = 0;     // full-refit shuffle seed
};

// Trains a scorer on the reduction of the whole history. Empty history
// yields the zero scorer. In full-refit mode the reduction rows are put in
// a canonical content order before the seeded shuffle, so the result does
// not depend on the order records were logged.
Scorer polopt(const PolOptConfig& cfg, const FeatureScaler& scaler,
              const History& h, int num_actions, int dim);

// Streaming counterpart: one SGD step per appended record on an owned
// scorer. This is what agents use round by round.
class IncrementalPolOpt {
 public:
  IncrementalPolOpt(PolOptConfig cfg, FeatureScaler scaler, int num_actions,
                    int dim);

  void observe(const Interaction& rec);
  // One counterfactual step applied to a copy; the real scorer is untouched.
  Scorer probe(const Interaction& rec) const;

  const Scorer& scorer() const { return scorer_; }
  Scorer& scorer() { return scorer_; }

 private:
  PolOptConfig cfg_;
  Scorer scorer_;
};

// Monte-Carlo IPS estimate of a deterministic policy's value on a log:
// mean of r * 1[policy(x) = a] / p.
double ips_value(const History& h,
                 const std::function<int(const Context&)>& policy);

}  // namespace melee
