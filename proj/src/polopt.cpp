#include "melee/polopt.hpp"

#include <algorithm>
#include <numeric>

namespace melee {

std::string polopt_method_name(PolOptMethod m) {
  return m == PolOptMethod::direct ? "direct" : "ips";
}

PolOptMethod polopt_method_from_name(const std::string& name) {
  if (name == "direct") return PolOptMethod::direct;
  if (name == "ips") return PolOptMethod::ips;
  throw ConfigError("unknown policy optimizer method: " + name);
}

std::vector<double> ips_targets(const Interaction& rec, int num_actions) {
  if (!(rec.propensity > 0.0)) throw DataError("ips_targets: propensity must be positive");
  std::vector<double> t(num_actions, 0.0);
  t[rec.action] = rec.reward / rec.propensity;
  return t;
}

DirectTargets direct_targets(const Interaction& rec, int num_actions) {
  DirectTargets dt;
  dt.targets.assign(num_actions, 0.0);
  dt.mask.assign(num_actions, 0.0);
  dt.targets[rec.action] = rec.reward;
  dt.mask[rec.action] = 1.0;
  return dt;
}

namespace {

void apply_reduction(Scorer& f, const PolOptConfig& cfg, const Interaction& rec) {
  const int K = f.num_actions;
  if (cfg.method == PolOptMethod::direct) {
    const DirectTargets dt = direct_targets(rec, K);
    f.sgd_update(rec.context, dt.targets, dt.mask, cfg.learning_rate);
  } else {
    const std::vector<double> t = ips_targets(rec, K);
    const std::vector<double> mask(K, 1.0);
    f.sgd_update(rec.context, t, mask, cfg.learning_rate);
  }
}

}  // namespace

Scorer polopt(const PolOptConfig& cfg, const FeatureScaler& scaler,
              const History& h, int num_actions, int dim) {
  Scorer f = Scorer::zero(num_actions, dim, scaler);
  if (h.empty()) return f;
  if (!cfg.full_refit) {
    for (const auto& rec : h.records) apply_reduction(f, cfg, rec);
    return f;
  }
  // Canonical content order makes the result independent of logging order.
  std::vector<std::size_t> order(h.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Interaction& ra = h.records[a];
    const Interaction& rb = h.records[b];
    if (ra.context.features != rb.context.features)
      return ra.context.features < rb.context.features;
    if (ra.action != rb.action) return ra.action < rb.action;
    if (ra.reward != rb.reward) return ra.reward < rb.reward;
    return ra.propensity < rb.propensity;
  });
  Rng rng(cfg.seed);
  for (int e = 0; e < cfg.epochs; ++e) {
    Rng epoch_rng = rng.split(static_cast<std::uint64_t>(e));
    std::vector<std::size_t> pass = order;
    epoch_rng.shuffle(pass);
    for (std::size_t idx : pass) apply_reduction(f, cfg, h.records[idx]);
  }
  return f;
}

IncrementalPolOpt::IncrementalPolOpt(PolOptConfig cfg, FeatureScaler scaler,
                                     int num_actions, int dim)
    : cfg_(std::move(cfg)),
      scorer_(Scorer::zero(num_actions, dim, std::move(scaler))) {}

void IncrementalPolOpt::observe(const Interaction& rec) {
  apply_reduction(scorer_, cfg_, rec);
}

Scorer IncrementalPolOpt::probe(const Interaction& rec) const {
  Scorer copy = scorer_;
  apply_reduction(copy, cfg_, rec);
  return copy;
}

double ips_value(const History& h,
                 const std::function<int(const Context&)>& policy) {
  if (h.empty()) throw DataError("ips_value: empty history");
  double total = 0.0;
  for (const auto& rec : h.records) {
    if (policy(rec.context) == rec.action) total += rec.reward / rec.propensity;
  }
  return total / static_cast<double>(h.size());
}

}  // namespace melee
