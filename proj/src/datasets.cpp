#include "melee/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace melee {

SupervisedDataset gen_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 2) throw ConfigError("gen_synthetic: need n >= 2");
  if (!(spec.bayes_error >= 0.0 && spec.bayes_error <= 0.5))
    throw ConfigError("gen_synthetic: bayes error must lie in [0, 0.5]");

  const double w = 2.0 * spec.bayes_error;  // horizontal overlap width
  const int n_class1 = (spec.n + 1) / 2;
  const int n_class0 = spec.n - n_class1;

  Rng rng = Rng(spec.seed).split("synthetic");
  SupervisedDataset ds;
  ds.num_actions = 2;
  ds.dim = 2;
  ds.rows.reserve(spec.n);

  auto push_row = [&](int cls, double x_lo) {
    LabeledExample row;
    row.x.features = {x_lo + rng.uniform(), rng.uniform()};
    row.r.rewards = {cls == 0 ? 1.0 : 0.0, cls == 1 ? 1.0 : 0.0};
    ds.rows.push_back(std::move(row));
  };
  // class 0 on [0,1]^2, class 1 on [1-w, 2-w] x [0,1]
  for (int i = 0; i < n_class0; ++i) push_row(0, 0.0);
  for (int i = 0; i < n_class1; ++i) push_row(1, 1.0 - w);
  rng.shuffle(ds.rows);
  return ds;
}

double synthetic_optimal_boundary(double bayes_error) {
  return 1.0 - bayes_error;
}

int synthetic_optimal_class(double x0, double bayes_error) {
  return x0 < synthetic_optimal_boundary(bayes_error) ? 0 : 1;
}

std::vector<SyntheticSpec> sample_suite_specs(int count, int size, Rng rng) {
  if (count < 1) throw ConfigError("sample_suite_specs: need count >= 1");
  std::vector<SyntheticSpec> specs;
  specs.reserve(count);
  for (int i = 0; i < count; ++i) {
    SyntheticSpec spec;
    spec.bayes_error = rng.split("bayes").split(i).uniform(0.0, 0.5);
    spec.n = size;
    spec.seed = rng.split("task").split(i).seed();
    specs.push_back(spec);
  }
  return specs;
}

std::vector<SupervisedDataset> sample_training_suite(int count, int size, Rng rng) {
  std::vector<SupervisedDataset> tasks;
  for (const auto& spec : sample_suite_specs(count, size, rng)) {
    tasks.push_back(gen_synthetic(spec));
  }
  return tasks;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool is_missing(const std::string& s) {
  return s.empty() || s == "?" || s == "nan" || s == "NaN" || s == "NA";
}

}  // namespace

SupervisedDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const std::vector<std::string> header_raw = split_csv_line(line);
  std::vector<std::string> header;
  header.reserve(header_raw.size());
  for (const auto& h : header_raw) header.push_back(trim(h));

  // f0..f{D-1} then either y or r0..r{K-1}
  int dim = 0;
  while (dim < static_cast<int>(header.size()) &&
         header[dim] == "f" + std::to_string(dim)) {
    ++dim;
  }
  if (dim == 0) {
    throw DataError(path + ": expected first column 'f0', found '" +
                    (header.empty() ? "" : header[0]) + "'");
  }
  bool multiclass = false;
  int num_rewards = 0;
  if (dim == static_cast<int>(header.size()) - 1 && header[dim] == "y") {
    multiclass = true;
  } else {
    for (int i = dim; i < static_cast<int>(header.size()); ++i) {
      const std::string want = "r" + std::to_string(i - dim);
      if (header[i] != want) {
        throw DataError(path + ": expected column '" + want + "', found '" +
                        header[i] + "'");
      }
      ++num_rewards;
    }
    if (num_rewards < 2)
      throw DataError(path + ": need a 'y' column or at least two reward columns");
  }

  struct RawRow {
    std::vector<double> features;
    std::vector<double> rewards;
    int label = -1;
  };
  std::vector<RawRow> raw;
  int max_label = -1;
  std::size_t dropped = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    bool missing = false;
    for (const auto& f : fields) {
      if (is_missing(trim(f))) {
        missing = true;
        break;
      }
    }
    if (missing) {
      ++dropped;
      continue;
    }
    RawRow row;
    try {
      for (int d = 0; d < dim; ++d) {
        row.features.push_back(std::stod(trim(fields[d])));
      }
      if (multiclass) {
        const double y = std::stod(trim(fields[dim]));
        row.label = static_cast<int>(std::llround(y));
        if (row.label < 0 || std::fabs(y - row.label) > 1e-9) {
          throw DataError(path + ":" + std::to_string(lineno) +
                          ": label column must hold nonnegative integers");
        }
        max_label = std::max(max_label, row.label);
      } else {
        for (int k = 0; k < num_rewards; ++k) {
          const double r = std::stod(trim(fields[dim + k]));
          if (!(r >= 0.0 && r <= 1.0)) {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": reward outside [0,1] in column r" + std::to_string(k));
          }
          row.rewards.push_back(r);
        }
      }
    } catch (const DataError&) {
      throw;
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed numeric field");
    }
    raw.push_back(std::move(row));
  }
  if (dropped > 0) {
    std::cerr << path << ": dropped " << dropped << " row(s) with missing values\n";
  }
  if (raw.empty()) throw DataError(path + ": no usable rows");

  SupervisedDataset ds;
  ds.dim = dim;
  ds.num_actions = multiclass ? std::max(max_label + 1, 2) : num_rewards;
  for (auto& row : raw) {
    LabeledExample ex;
    ex.x.features = std::move(row.features);
    if (multiclass) {
      ex.r.rewards.assign(ds.num_actions, 0.0);
      ex.r.rewards[row.label] = 1.0;
    } else {
      ex.r.rewards = std::move(row.rewards);
    }
    ds.rows.push_back(std::move(ex));
  }
  ds.validate();
  return ds;
}

void write_csv(const std::string& path, const SupervisedDataset& ds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (int d = 0; d < ds.dim; ++d) out << "f" << d << ",";
  for (int k = 0; k < ds.num_actions; ++k) {
    out << "r" << k << (k + 1 == ds.num_actions ? "" : ",");
  }
  out << "\n";
  char buf[32];
  auto put = [&](double v, bool last) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << (last ? "" : ",");
  };
  for (const auto& row : ds.rows) {
    for (int d = 0; d < ds.dim; ++d) put(row.x.features[d], false);
    for (int k = 0; k < ds.num_actions; ++k) {
      put(row.r.rewards[k], k + 1 == ds.num_actions);
    }
    out << "\n";
  }
}

BanditStream bandit_stream(const SupervisedDataset& ds, std::uint64_t seed) {
  ds.validate();
  if (static_cast<int>(ds.size()) <= kCalibrationRows) {
    throw ConfigError("bandit_stream: dataset must have more than " +
                      std::to_string(kCalibrationRows) + " rows");
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng(seed).split("stream");
  rng.shuffle(order);

  BanditStream stream;
  stream.calibration.num_actions = stream.rounds.num_actions = ds.num_actions;
  stream.calibration.dim = stream.rounds.dim = ds.dim;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dst = i < kCalibrationRows ? stream.calibration : stream.rounds;
    dst.rows.push_back(ds.rows[order[i]]);
  }
  return stream;
}

}  // namespace melee
