#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "melee/rng.hpp"
#include "melee/types.hpp"

namespace melee {

// 2-D binary task with a dialed-in Bayes error. Each class is uniform on a
// unit square; the class-1 square is shifted left so the horizontal overlap
// has width w = 2 * bayes_error. Densities are equal inside the overlap, so
// the best classifier errs on half of it: w/2 = bayes_error. The optimal
// boundary is the vertical midline of the overlap, x = 1 - bayes_error.
struct SyntheticSpec {
  double bayes_error = 0.0;  // in [0, 0.5]
  int n = 0;
  std::uint64_t seed = 0;
};

SupervisedDataset gen_synthetic(const SyntheticSpec& spec);

// The vertical boundary achieving the minimum error, and its decision rule.
double synthetic_optimal_boundary(double bayes_error);
int synthetic_optimal_class(double x0, double bayes_error);

// `count` tasks with Bayes errors drawn uniformly from [0, 0.5].
std::vector<SyntheticSpec> sample_suite_specs(int count, int size, Rng rng);
std::vector<SupervisedDataset> sample_training_suite(int count, int size, Rng rng);

// CSV with header f0..f{D-1} plus either a multiclass label column y or
// explicit reward columns r0..r{K-1}. Multiclass labels become one-hot
// rewards. Rows with missing values are dropped (count reported on stderr).
SupervisedDataset load_csv(const std::string& path);
void write_csv(const std::string& path, const SupervisedDataset& ds);

// Seeded presentation order for a bandit run. The first 30 rows of the
// permutation are held out for calibration / hyperparameter selection; the
// rest are the bandit rounds.
struct BanditStream {
  SupervisedDataset calibration;  // 30 rows
  SupervisedDataset rounds;
};

inline constexpr int kCalibrationRows = 30;

BanditStream bandit_stream(const SupervisedDataset& ds, std::uint64_t seed);

}  // namespace melee
