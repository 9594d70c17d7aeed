#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "melee/types.hpp"

namespace melee {

// One algorithm's run on one bandit stream.
struct RunResult {
  std::string algorithm;
  std::string dataset_id;
  std::uint64_t seed = 0;
  std::vector<double> trace;  // per-round rewards
  double progressive_return = 0.0;
};

// Mean per-round reward.
double progressive_validation(std::span<const double> trace);

enum class TTestVerdict { a_wins, b_wins, tie };

// Paired two-sided Student t-test at level alpha on per-round reward
// differences. Traces must come from the same presentation order. Identical
// traces are a tie; a constant nonzero difference is a certain win.
TTestVerdict paired_ttest(std::span<const double> trace_a,
                          std::span<const double> trace_b, double alpha = 0.01);

// Two-sided p-value of a t statistic with df degrees of freedom, via the
// regularized incomplete beta function.
double student_t_two_sided_p(double t, int df);

struct WinLossMatrix {
  std::vector<std::string> algorithms;
  std::vector<int> cells;  // wins minus losses, row beats column

  int at(int row, int col) const {
    return cells[static_cast<std::size_t>(row) * algorithms.size() + col];
  }
};

// Entry (i,j): over all streams, significant wins of i over j minus losses.
// Every algorithm must have a trace for every stream, with equal lengths.
WinLossMatrix win_loss_matrix(const std::vector<RunResult>& results,
                              double alpha = 0.01);

// Per-stream min-max normalized returns, reported as one CDF row per
// algorithm over the grid x in {0, 0.01, ..., 1}: the fraction of streams
// with relative reward >= x. Streams where all algorithms tie at the same
// return count as relative reward 1 for everyone.
struct CdfTable {
  std::vector<double> grid;
  std::vector<std::string> algorithms;
  std::vector<std::vector<double>> fractions;  // [algorithm][grid point]
};

CdfTable relative_reward_cdf(const std::vector<RunResult>& results);

// Relative rewards per stream (exposed for tests of the normalization).
std::map<std::string, double> min_max_normalize(
    const std::map<std::string, double>& returns_by_algorithm);

void write_results_json(const std::string& path,
                        const std::vector<RunResult>& results);
std::vector<RunResult> read_results_json(const std::string& path);
std::string results_to_json(const std::vector<RunResult>& results);

void write_winloss_csv(const std::string& path, const WinLossMatrix& matrix);
void write_cdf_csv(const std::string& path, const CdfTable& table);

}  // namespace melee
