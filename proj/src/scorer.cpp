#include "melee/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "melee/kernels.hpp"

namespace melee {

namespace {

double sigmoid(double z) {
  // Clamping keeps the output strictly inside (0,1).
  z = std::clamp(z, -36.0, 36.0);
  return 1.0 / (1.0 + std::exp(-z));
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

std::string scaling_mode_name(ScalingMode mode) {
  return mode == ScalingMode::standardize ? "standardize" : "minmax";
}

ScalingMode scaling_mode_from_name(const std::string& name) {
  if (name == "standardize") return ScalingMode::standardize;
  if (name == "minmax") return ScalingMode::minmax;
  throw ConfigError("unknown scaling mode: " + name);
}

FeatureScaler FeatureScaler::identity(int dim) {
  FeatureScaler s;
  s.mode = ScalingMode::standardize;
  s.shift.assign(dim, 0.0);
  s.scale.assign(dim, 1.0);
  s.fitted = true;
  return s;
}

FeatureScaler FeatureScaler::fit(ScalingMode mode,
                                 std::span<const LabeledExample> rows, int dim) {
  if (rows.empty()) throw DataError("cannot fit a scaler on an empty sample");
  FeatureScaler s;
  s.mode = mode;
  s.shift.assign(dim, 0.0);
  s.scale.assign(dim, 0.0);
  const double n = static_cast<double>(rows.size());
  if (mode == ScalingMode::standardize) {
    for (const auto& row : rows) {
      kernels::axpy(1.0, row.x.features.data(), s.shift.data(), dim);
    }
    for (double& m : s.shift) m /= n;
    std::vector<double> var(dim, 0.0);
    for (const auto& row : rows) {
      for (int d = 0; d < dim; ++d) {
        const double c = row.x.features[d] - s.shift[d];
        var[d] += c * c;
      }
    }
    for (int d = 0; d < dim; ++d) {
      const double sd = std::sqrt(var[d] / n);
      s.scale[d] = sd > 0.0 ? 1.0 / sd : 0.0;
    }
  } else {
    std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
    for (const auto& row : rows) {
      for (int d = 0; d < dim; ++d) {
        lo[d] = std::min(lo[d], row.x.features[d]);
        hi[d] = std::max(hi[d], row.x.features[d]);
      }
    }
    for (int d = 0; d < dim; ++d) {
      s.shift[d] = lo[d];
      const double range = hi[d] - lo[d];
      s.scale[d] = range > 0.0 ? 1.0 / range : 0.0;
    }
  }
  s.fitted = true;
  return s;
}

std::vector<double> FeatureScaler::transform(const Context& x) const {
  if (!fitted) throw StateError("feature scaler used before fitting");
  if (x.dim() != dim()) throw DataError("context dimension does not match scaler");
  std::vector<double> out(x.features.size());
  for (std::size_t d = 0; d < out.size(); ++d) {
    out[d] = (x.features[d] - shift[d]) * scale[d];
  }
  return out;
}

double Calibrator::probability(int action, double score) const {
  if (!fitted) throw StateError("calibrator used before fitting");
  return sigmoid(slope[action] * score + intercept[action]);
}

Scorer Scorer::zero(int num_actions, int dim, FeatureScaler scaler) {
  Scorer f;
  f.num_actions = num_actions;
  f.dim = dim;
  f.weights.assign(static_cast<std::size_t>(num_actions) * dim, 0.0);
  f.bias.assign(num_actions, 0.0);
  f.scaler = std::move(scaler);
  return f;
}

std::vector<double> Scorer::scores(const Context& x) const {
  const std::vector<double> z = scaler.transform(x);
  std::vector<double> out(num_actions);
  kernels::matvec(weights.data(), z.data(), out.data(), num_actions, dim);
  for (int k = 0; k < num_actions; ++k) out[k] += bias[k];
  return out;
}

int Scorer::predict(const Context& x) const { return argmax_lowest(scores(x)); }

void Scorer::sgd_update(const Context& x, std::span<const double> targets,
                        std::span<const double> mask, double lr) {
  if (!(lr >= 0.0)) throw ConfigError("sgd_update: learning rate must be >= 0");
  if (static_cast<int>(targets.size()) != num_actions ||
      static_cast<int>(mask.size()) != num_actions) {
    throw DataError("sgd_update: target/mask length must equal K");
  }
  if (lr == 0.0) return;
  const std::vector<double> z = scaler.transform(x);
  std::vector<double> raw(num_actions);
  kernels::matvec(weights.data(), z.data(), raw.data(), num_actions, dim);
  for (int k = 0; k < num_actions; ++k) {
    if (mask[k] == 0.0) continue;
    const double err = raw[k] + bias[k] - targets[k];
    const double step = -lr * mask[k] * err;
    if (!std::isfinite(step)) throw NumericError("sgd_update: non-finite gradient");
    kernels::axpy(step, z.data(), weights.data() + static_cast<std::size_t>(k) * dim,
                  dim);
    bias[k] += step;
  }
}

PlattFit platt_fit(std::span<const double> scores, std::span<const int> labels,
                   int max_iter) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw DataError("platt_fit: need matching nonempty scores and labels");
  }
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += (y != 0);

  const double base_rate =
      (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n) + 2.0);

  // Single-class column: nothing to regress on.
  if (n_pos == 0 || n_pos == n) return {0.0, logit(base_rate)};

  double mean_s = kernels::sum(scores.data(), n) / static_cast<double>(n);
  double var_s = 0.0;
  for (double s : scores) var_s += (s - mean_s) * (s - mean_s);
  var_s /= static_cast<double>(n);
  // Constant scores reduce to an intercept-only fit, where the smoothed MLE
  // is the base rate in closed form.
  if (var_s < 1e-14) return {0.0, logit(base_rate)};

  // Pseudo-observations (mean_s, 1) and (mean_s, 0) keep the MLE finite on
  // separable data. The small slope-only ridge tames fits on weak-signal
  // 30-row samples; it vanishes at slope 0, so the constant-score and
  // single-class base rates stay exact.
  constexpr double kSlopeRidge = 0.5;
  std::vector<double> s(scores.begin(), scores.end());
  std::vector<int> y(labels.begin(), labels.end());
  s.push_back(mean_s);
  y.push_back(1);
  s.push_back(mean_s);
  y.push_back(0);

  auto nll = [&](double a, double b) {
    double total = 0.5 * kSlopeRidge * a * a;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double z = a * s[i] + b;
      // log(1 + e^z) - y z, computed stably
      total += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) -
               (y[i] ? z : 0.0);
    }
    return total;
  };

  double a = 0.0, b = 0.0;
  double loss = nll(a, b);
  for (int iter = 0; iter < max_iter; ++iter) {
    double ga = kSlopeRidge * a, gb = 0.0;
    double haa = kSlopeRidge, hab = 0.0, hbb = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double p = sigmoid(a * s[i] + b);
      const double e = p - (y[i] ? 1.0 : 0.0);
      const double w = std::max(p * (1.0 - p), 1e-12);
      ga += e * s[i];
      gb += e;
      haa += w * s[i] * s[i];
      hab += w * s[i];
      hbb += w;
    }
    if (std::max(std::fabs(ga), std::fabs(gb)) < 1e-10) break;
    const double det = haa * hbb - hab * hab;
    if (!(std::fabs(det) > 1e-300)) break;
    double da = -(hbb * ga - hab * gb) / det;
    double db = -(haa * gb - hab * ga) / det;
    // Backtrack if the full Newton step overshoots.
    double step = 1.0;
    for (int half = 0; half < 30; ++half) {
      const double next = nll(a + step * da, b + step * db);
      if (next <= loss + 1e-15) {
        a += step * da;
        b += step * db;
        loss = next;
        break;
      }
      step *= 0.5;
    }
  }
  return {a, b};
}

Calibrator fit_calibration(const Scorer& f, const SupervisedDataset& val) {
  if (val.rows.empty()) throw DataError("calibration set is empty");
  const int K = f.num_actions;
  const std::size_t n = val.rows.size();
  std::vector<std::vector<double>> all_scores(n);
  std::vector<int> best(n);
  for (std::size_t i = 0; i < n; ++i) {
    all_scores[i] = f.scores(val.rows[i].x);
    best[i] = val.rows[i].r.best_action();
  }
  Calibrator cal;
  cal.slope.resize(K);
  cal.intercept.resize(K);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (int k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = all_scores[i][k];
      y[i] = best[i] == k ? 1 : 0;
    }
    const PlattFit fit = platt_fit(s, y);
    cal.slope[k] = fit.slope;
    cal.intercept[k] = fit.intercept;
  }
  cal.fitted = true;
  return cal;
}

void Scorer::fit_calibration(const SupervisedDataset& val) {
  calibrator = melee::fit_calibration(*this, val);
}

ActionDistribution Scorer::predict_proba(const Context& x) const {
  if (!calibrator.fitted) throw StateError("predict_proba requires a fitted calibrator");
  const std::vector<double> raw = scores(x);
  ActionDistribution dist;
  dist.probabilities.resize(num_actions);
  double total = 0.0;
  for (int k = 0; k < num_actions; ++k) {
    dist.probabilities[k] = calibrator.probability(k, raw[k]);
    total += dist.probabilities[k];
  }
  for (double& p : dist.probabilities) p /= total;
  return dist;
}

Scorer fit_supervised(const SupervisedDataset& ds, ScalingMode mode, double lr,
                      int epochs) {
  ds.validate();
  FeatureScaler scaler = FeatureScaler::fit(mode, ds.rows, ds.dim);
  Scorer f = Scorer::zero(ds.num_actions, ds.dim, std::move(scaler));
  const std::vector<double> mask(ds.num_actions, 1.0);
  for (int e = 0; e < epochs; ++e) {
    for (const auto& row : ds.rows) {
      f.sgd_update(row.x, row.r.rewards, mask, lr);
    }
  }
  return f;
}

std::pair<int, int> cv_fold_range(int n, int fold, int folds) {
  return {fold * n / folds, (fold + 1) * n / folds};
}

HyperParams select_hyperparams(const SupervisedDataset& train30) {
  train30.validate();
  const int n = static_cast<int>(train30.rows.size());
  if (n < 6) throw ConfigError("hyperparameter selection needs at least 6 rows");
  constexpr int kFolds = 3;
  constexpr int kEpochs = 10;
  const ScalingMode modes[] = {ScalingMode::standardize, ScalingMode::minmax};
  const double lrs[] = {0.001, 0.01, 0.1, 1.0};

  HyperParams best{ScalingMode::standardize, 0.001};
  int best_correct = -1;
  for (ScalingMode mode : modes) {
    for (double lr : lrs) {
      int correct = 0;
      for (int fold = 0; fold < kFolds; ++fold) {
        const auto [lo, hi] = cv_fold_range(n, fold, kFolds);
        SupervisedDataset train;
        train.num_actions = train30.num_actions;
        train.dim = train30.dim;
        for (int i = 0; i < n; ++i) {
          if (i < lo || i >= hi) train.rows.push_back(train30.rows[i]);
        }
        const Scorer f = fit_supervised(train, mode, lr, kEpochs);
        for (int i = lo; i < hi; ++i) {
          if (f.predict(train30.rows[i].x) == train30.rows[i].r.best_action())
            ++correct;
        }
      }
      if (correct > best_correct) {
        best_correct = correct;
        best = {mode, lr};
      }
    }
  }
  return best;
}

namespace {

nlohmann::json scaler_to_json(const FeatureScaler& s) {
  return {{"mode", scaling_mode_name(s.mode)},
          {"shift", s.shift},
          {"scale", s.scale},
          {"fitted", s.fitted}};
}

FeatureScaler scaler_from_json(const nlohmann::json& j) {
  FeatureScaler s;
  s.mode = scaling_mode_from_name(j.at("mode").get<std::string>());
  s.shift = j.at("shift").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  s.fitted = j.at("fitted").get<bool>();
  return s;
}

}  // namespace

std::string scorer_to_json(const Scorer& f) {
  nlohmann::json j;
  j["version"] = 1;
  j["K"] = f.num_actions;
  j["D"] = f.dim;
  j["scaler"] = scaler_to_json(f.scaler);
  j["weights"] = f.weights;
  j["bias"] = f.bias;
  if (f.calibrator.fitted) {
    j["calibrator"] = {{"slope", f.calibrator.slope},
                       {"intercept", f.calibrator.intercept}};
  } else {
    j["calibrator"] = nullptr;
  }
  return j.dump(2);
}

Scorer scorer_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("scorer JSON parse failure: ") + e.what());
  }
  if (j.at("version").get<int>() != 1) throw DataError("unsupported scorer version");
  Scorer f;
  f.num_actions = j.at("K").get<int>();
  f.dim = j.at("D").get<int>();
  f.scaler = scaler_from_json(j.at("scaler"));
  f.weights = j.at("weights").get<std::vector<double>>();
  f.bias = j.at("bias").get<std::vector<double>>();
  if (!j.at("calibrator").is_null()) {
    f.calibrator.slope = j["calibrator"].at("slope").get<std::vector<double>>();
    f.calibrator.intercept = j["calibrator"].at("intercept").get<std::vector<double>>();
    f.calibrator.fitted = true;
  }
  if (static_cast<int>(f.weights.size()) != f.num_actions * f.dim ||
      static_cast<int>(f.bias.size()) != f.num_actions) {
    throw DataError("scorer JSON has inconsistent shapes");
  }
  return f;
}

void save_scorer(const std::string& path, const Scorer& f) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << scorer_to_json(f) << '\n';
}

Scorer load_scorer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scorer_from_json(ss.str());
}

}  // namespace melee
