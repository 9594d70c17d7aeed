#include "melee/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace melee {

double progressive_validation(std::span<const double> trace) {
  if (trace.empty()) throw DataError("progressive_validation: empty trace");
  double total = 0.0;
  for (double r : trace) total += r;
  return total / static_cast<double>(trace.size());
}

namespace {

// Regularized incomplete beta I_x(a,b) by Lentz's continued fraction.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_two_sided_p(double t, int df) {
  if (df < 1) throw ConfigError("student_t_two_sided_p: df must be >= 1");
  if (std::isinf(t)) return 0.0;
  const double nu = static_cast<double>(df);
  const double x = nu / (nu + t * t);
  return incomplete_beta(nu / 2.0, 0.5, x);
}

TTestVerdict paired_ttest(std::span<const double> trace_a,
                          std::span<const double> trace_b, double alpha) {
  if (trace_a.size() != trace_b.size())
    throw DataError("paired_ttest: traces must have equal length");
  const std::size_t n = trace_a.size();
  if (n < 2) throw DataError("paired_ttest: need at least two paired rounds");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += trace_a[i] - trace_b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = (trace_a[i] - trace_b[i]) - mean;
    ss += c * c;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  if (sd == 0.0) {
    // Degenerate differences: identical traces tie, a constant offset is a
    // certain verdict.
    if (mean == 0.0) return TTestVerdict::tie;
    return mean > 0.0 ? TTestVerdict::a_wins : TTestVerdict::b_wins;
  }
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const double p = student_t_two_sided_p(t, static_cast<int>(n) - 1);
  if (p >= alpha) return TTestVerdict::tie;
  return t > 0.0 ? TTestVerdict::a_wins : TTestVerdict::b_wins;
}

namespace {

struct GroupedResults {
  std::vector<std::string> algorithms;
  std::vector<std::string> streams;  // dataset_id + seed key
  // stream -> algorithm -> result index
  std::map<std::string, std::map<std::string, std::size_t>> index;
};

std::string stream_key(const RunResult& r) {
  return r.dataset_id + "#" + std::to_string(r.seed);
}

GroupedResults group(const std::vector<RunResult>& results) {
  GroupedResults g;
  std::set<std::string> algs;
  std::set<std::string> streams;
  for (std::size_t i = 0; i < results.size(); ++i) {
    algs.insert(results[i].algorithm);
    const std::string key = stream_key(results[i]);
    streams.insert(key);
    g.index[key][results[i].algorithm] = i;
  }
  g.algorithms.assign(algs.begin(), algs.end());
  g.streams.assign(streams.begin(), streams.end());
  for (const auto& s : g.streams) {
    for (const auto& a : g.algorithms) {
      if (!g.index[s].count(a)) {
        throw DataError("missing run for algorithm '" + a + "' on stream '" + s + "'");
      }
    }
  }
  return g;
}

}  // namespace

WinLossMatrix win_loss_matrix(const std::vector<RunResult>& results,
                              double alpha) {
  const GroupedResults g = group(results);
  const int n = static_cast<int>(g.algorithms.size());
  WinLossMatrix m;
  m.algorithms = g.algorithms;
  m.cells.assign(static_cast<std::size_t>(n) * n, 0);
  for (const auto& stream : g.streams) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const RunResult& a = results[g.index.at(stream).at(g.algorithms[i])];
        const RunResult& b = results[g.index.at(stream).at(g.algorithms[j])];
        if (a.trace.size() != b.trace.size()) {
          throw DataError("trace lengths differ on stream '" + stream + "'");
        }
        const TTestVerdict v = paired_ttest(a.trace, b.trace, alpha);
        if (v == TTestVerdict::a_wins) {
          m.cells[static_cast<std::size_t>(i) * n + j] += 1;
          m.cells[static_cast<std::size_t>(j) * n + i] -= 1;
        } else if (v == TTestVerdict::b_wins) {
          m.cells[static_cast<std::size_t>(i) * n + j] -= 1;
          m.cells[static_cast<std::size_t>(j) * n + i] += 1;
        }
      }
    }
  }
  return m;
}

std::map<std::string, double> min_max_normalize(
    const std::map<std::string, double>& returns_by_algorithm) {
  if (returns_by_algorithm.size() < 2)
    throw DataError("min_max_normalize: need at least two algorithms");
  double lo = returns_by_algorithm.begin()->second;
  double hi = lo;
  for (const auto& [_, g] : returns_by_algorithm) {
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  std::map<std::string, double> rel;
  for (const auto& [name, g] : returns_by_algorithm) {
    rel[name] = hi > lo ? (g - lo) / (hi - lo) : 1.0;
  }
  return rel;
}

CdfTable relative_reward_cdf(const std::vector<RunResult>& results) {
  const GroupedResults g = group(results);
  if (g.algorithms.size() < 2)
    throw DataError("relative_reward_cdf: need at least two algorithms");

  // relative reward per (stream, algorithm)
  std::map<std::string, std::vector<double>> rel;
  for (const auto& a : g.algorithms) rel[a] = {};
  for (const auto& stream : g.streams) {
    std::map<std::string, double> returns;
    for (const auto& a : g.algorithms) {
      returns[a] = results[g.index.at(stream).at(a)].progressive_return;
    }
    for (auto& [a, value] : min_max_normalize(returns)) rel[a].push_back(value);
  }

  CdfTable table;
  table.algorithms = g.algorithms;
  for (int i = 0; i <= 100; ++i) table.grid.push_back(i / 100.0);
  for (const auto& a : g.algorithms) {
    std::vector<double> row;
    row.reserve(table.grid.size());
    for (double x : table.grid) {
      int count = 0;
      for (double value : rel[a]) {
        if (value >= x - 1e-12) ++count;
      }
      row.push_back(static_cast<double>(count) / rel[a].size());
    }
    table.fractions.push_back(std::move(row));
  }
  return table;
}

namespace {

nlohmann::json result_to_json(const RunResult& r) {
  return {{"algorithm", r.algorithm},
          {"dataset", r.dataset_id},
          {"seed", r.seed},
          {"trace", r.trace},
          {"G", r.progressive_return}};
}

RunResult result_from_json(const nlohmann::json& j) {
  RunResult r;
  r.algorithm = j.at("algorithm").get<std::string>();
  r.dataset_id = j.at("dataset").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.trace = j.at("trace").get<std::vector<double>>();
  r.progressive_return = j.at("G").get<double>();
  return r;
}

}  // namespace

std::string results_to_json(const std::vector<RunResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) arr.push_back(result_to_json(r));
  return arr.dump(2);
}

void write_results_json(const std::string& path,
                        const std::vector<RunResult>& results) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << results_to_json(results) << '\n';
}

std::vector<RunResult> read_results_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json arr;
  try {
    in >> arr;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  std::vector<RunResult> results;
  for (const auto& j : arr) results.push_back(result_from_json(j));
  return results;
}

void write_winloss_csv(const std::string& path, const WinLossMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "algorithm";
  for (const auto& a : matrix.algorithms) out << "," << a;
  out << "\n";
  const int n = static_cast<int>(matrix.algorithms.size());
  for (int i = 0; i < n; ++i) {
    out << matrix.algorithms[i];
    for (int j = 0; j < n; ++j) out << "," << matrix.at(i, j);
    out << "\n";
  }
}

void write_cdf_csv(const std::string& path, const CdfTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "x";
  for (const auto& a : table.algorithms) out << "," << a;
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.2f", table.grid[i]);
    out << buf;
    for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
      std::snprintf(buf, sizeof(buf), "%.17g", table.fractions[a][i]);
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace melee
