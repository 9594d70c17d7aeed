#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "melee/types.hpp"

namespace melee {

enum class ScalingMode { standardize, minmax };

std::string scaling_mode_name(ScalingMode mode);
ScalingMode scaling_mode_from_name(const std::string& name);

// Per-dimension affine map fitted on a reference sample. Degenerate
// dimensions (zero variance / zero range) map to 0.
struct FeatureScaler {
  ScalingMode mode = ScalingMode::standardize;
  std::vector<double> shift;  // mean (standardize) or min (minmax)
  std::vector<double> scale;  // 1/std or 1/range; 0 on degenerate dims
  bool fitted = false;

  static FeatureScaler identity(int dim);
  static FeatureScaler fit(ScalingMode mode, std::span<const LabeledExample> rows,
                           int dim);

  int dim() const { return static_cast<int>(shift.size()); }
  std::vector<double> transform(const Context& x) const;
};

// Per-action logistic map from raw scores to probabilities:
// p_k(s) = sigmoid(slope_k * s + intercept_k), strictly inside (0,1).
struct Calibrator {
  std::vector<double> slope;
  std::vector<double> intercept;
  bool fitted = false;

  double probability(int action, double score) const;
};

// The hypothesis class: K independent linear regressors over scaled
// features, trained with SGD on squared loss.
struct Scorer {
  int num_actions = 0;  // K
  int dim = 0;          // D
  std::vector<double> weights;  // K x D, row-major
  std::vector<double> bias;     // K
  FeatureScaler scaler;
  Calibrator calibrator;

  static Scorer zero(int num_actions, int dim, FeatureScaler scaler);

  std::vector<double> scores(const Context& x) const;
  // Argmax of scores; ties go to the lowest action index.
  int predict(const Context& x) const;

  // One squared-loss gradient step per action, scaled by the per-action
  // weight mask. lr = 0 or an all-zero mask leaves the scorer unchanged.
  void sgd_update(const Context& x, std::span<const double> targets,
                  std::span<const double> mask, double lr);

  // Fits per-action Platt calibrators on a held-out labeled sample.
  void fit_calibration(const SupervisedDataset& val);
  bool calibrated() const { return calibrator.fitted; }

  // Calibrated per-action probabilities renormalized into a distribution.
  ActionDistribution predict_proba(const Context& x) const;
};

// Standalone Platt fit: maximum-likelihood logistic on (score, label) pairs,
// Newton iterations capped at max_iter. The fit is smoothed with one pseudo
// positive and one pseudo negative placed at the mean score, so constant
// scores yield the smoothed base rate (n+ + 1)/(n + 2). A single-class
// column falls back to that base rate directly.
struct PlattFit {
  double slope = 0.0;
  double intercept = 0.0;
};
PlattFit platt_fit(std::span<const double> scores, std::span<const int> labels,
                   int max_iter = 100);

Calibrator fit_calibration(const Scorer& f, const SupervisedDataset& val);

struct HyperParams {
  ScalingMode scaling = ScalingMode::standardize;
  double learning_rate = 0.001;
};

// Full-information SGD fit: every action regressed toward its reward, rows
// visited in order for `epochs` passes.
Scorer fit_supervised(const SupervisedDataset& ds, ScalingMode mode, double lr,
                      int epochs);

// Contiguous fold boundaries: [lo, hi) of `fold` out of `folds` over n rows.
std::pair<int, int> cv_fold_range(int n, int fold, int folds);

// 3-fold cross-validated accuracy over the fixed grid
// {standardize, minmax} x lr in {0.001, 0.01, 0.1, 1.0}; ties keep the
// earliest grid entry. Folds are contiguous blocks.
HyperParams select_hyperparams(const SupervisedDataset& train30);

// Versioned JSON round trip for scorers.
std::string scorer_to_json(const Scorer& f);
Scorer scorer_from_json(const std::string& text);
void save_scorer(const std::string& path, const Scorer& f);
Scorer load_scorer(const std::string& path);

}  // namespace melee
