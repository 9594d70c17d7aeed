// Command-line front end: generate synthetic tasks, train an exploration
// policy, run a single bandit experiment, or sweep a benchmark grid.
//
// Exit codes: 0 success, 2 usage, 3 data error, 4 numeric failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "melee/datasets.hpp"
#include "melee/evaluation.hpp"
#include "melee/explorers.hpp"
#include "melee/melee.hpp"

namespace fs = std::filesystem;
using namespace melee;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& s : split_list(text)) {
    try {
      seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw ConfigError("bad seed value: " + s);
    }
  }
  if (seeds.empty()) throw ConfigError("need at least one seed");
  return seeds;
}

// Dataset arguments accept files, comma lists, or directories of CSVs.
std::vector<std::string> expand_dataset_args(const std::vector<std::string>& args) {
  std::vector<std::string> paths;
  for (const std::string& arg : args) {
    for (const std::string& piece : split_list(arg)) {
      if (fs::is_directory(piece)) {
        std::vector<std::string> found;
        for (const auto& entry : fs::directory_iterator(piece)) {
          if (entry.path().extension() == ".csv") {
            found.push_back(entry.path().string());
          }
        }
        std::sort(found.begin(), found.end());
        paths.insert(paths.end(), found.begin(), found.end());
      } else {
        paths.push_back(piece);
      }
    }
  }
  if (paths.empty()) throw ConfigError("no datasets given");
  return paths;
}

std::string hash8(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, buf + 8);
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot open " + tmp + " for writing");
    out << text;
  }
  fs::rename(tmp, path);
}

// --- gen -----------------------------------------------------------------

struct GenArgs {
  int count = 10;
  int size = 500;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_gen(const GenArgs& args) {
  if (args.count < 1) throw ConfigError("--count must be positive");
  if (args.size < 2) throw ConfigError("--size must be at least 2");
  fs::create_directories(args.out);
  const auto specs = sample_suite_specs(args.count, args.size, Rng(args.seed));
  std::ostringstream manifest;
  manifest << "file,bayes_error,size,seed\n";
  for (std::size_t i = 0; i < specs.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "synth_%03zu.csv", i);
    write_csv((fs::path(args.out) / name).string(), gen_synthetic(specs[i]));
    char line[160];
    std::snprintf(line, sizeof(line), "%s,%.17g,%d,%llu\n", name,
                  specs[i].bayes_error, specs[i].n,
                  static_cast<unsigned long long>(specs[i].seed));
    manifest << line;
  }
  write_text_atomic((fs::path(args.out) / "manifest.txt").string(), manifest.str());
  std::cout << "wrote " << specs.size() << " tasks to " << args.out << "\n";
  return 0;
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
  std::vector<std::string> tasks;
  double mu = 0.1;
  int n_val = 30;
  int rounds = 10;
  std::uint64_t seed = 1;
  std::string method = "direct";
  std::string out = "policy.json";
  std::string log;
};

int cmd_train(const TrainArgs& args) {
  std::vector<SupervisedDataset> tasks;
  for (const std::string& path : expand_dataset_args(args.tasks)) {
    tasks.push_back(load_csv(path));
  }
  MeleeConfig cfg;
  cfg.mu = args.mu;
  cfg.n_val = args.n_val;
  cfg.rounds = args.rounds;
  cfg.method = polopt_method_from_name(args.method);
  const TrainResult result = train_melee(tasks, cfg, Rng(args.seed));
  save_policy(args.out, result.policy(), cfg);
  const std::string log_path = args.log.empty() ? args.out + ".log" : args.log;
  write_training_log(log_path, result);
  std::cout << "trained " << result.policies.size() << " policies; selected #"
            << result.selected + 1 << " (mean held-out return "
            << result.selection_returns[result.selected] << ")\n"
            << "policy: " << args.out << "\nlog: " << log_path << "\n";
  return 0;
}

// --- run / bench ---------------------------------------------------------

struct RunParams {
  ExplorerParams explorer;
  std::string method = "direct";
  double test_mu = 0.0;
  int cal_period = 50;
};

RunResult execute_run(const std::string& dataset_path, const std::string& algorithm,
                      const RunParams& params,
                      const std::optional<ExplorationPolicy>& policy,
                      std::uint64_t seed, History* history_out = nullptr) {
  const SupervisedDataset ds = load_csv(dataset_path);
  const BanditStream stream = bandit_stream(ds, seed);
  AgentConfig cfg;
  cfg.method = polopt_method_from_name(params.method);
  cfg.calibration_period = params.cal_period;

  RunOutput out;
  if (algorithm == "melee") {
    if (!policy) throw ConfigError("the melee explorer needs --policy");
    PolicyExplorer explorer(*policy, params.test_mu);
    out = run_bandit(stream, explorer, cfg, Rng(seed));
  } else {
    auto explorer = make_explorer(algorithm, params.explorer);
    out = run_bandit(stream, *explorer, cfg, Rng(seed));
  }
  if (history_out) *history_out = std::move(out.history);

  RunResult result;
  result.algorithm = algorithm;
  result.dataset_id = fs::path(dataset_path).stem().string();
  result.seed = seed;
  result.trace = out.trace.rewards();
  result.progressive_return = progressive_validation(result.trace);
  return result;
}

nlohmann::json run_result_json(const RunResult& r) {
  return {{"algorithm", r.algorithm},
          {"dataset", r.dataset_id},
          {"seed", r.seed},
          {"trace", r.trace},
          {"G", r.progressive_return}};
}

RunResult run_result_from_json(const nlohmann::json& j) {
  RunResult r;
  r.algorithm = j.at("algorithm").get<std::string>();
  r.dataset_id = j.at("dataset").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.trace = j.at("trace").get<std::vector<double>>();
  r.progressive_return = j.at("G").get<double>();
  return r;
}

struct RunArgs {
  std::string dataset;
  std::string explorer;
  std::string policy;
  std::uint64_t seed = 1;
  std::string out = "result.json";
  std::string history;
  RunParams params;
};

int cmd_run(const RunArgs& args) {
  std::optional<ExplorationPolicy> policy;
  if (!args.policy.empty()) policy = load_policy(args.policy);
  History history;
  const RunResult result =
      execute_run(args.dataset, args.explorer, args.params, policy, args.seed,
                  args.history.empty() ? nullptr : &history);
  write_text_atomic(args.out, run_result_json(result).dump(2) + "\n");
  if (!args.history.empty()) write_history_ndjson(args.history, history);
  std::cout << args.explorer << " on " << result.dataset_id
            << ": G = " << result.progressive_return << "\n";
  return 0;
}

// --- bench ---------------------------------------------------------------

struct BenchConfig {
  std::vector<std::string> datasets;
  std::vector<std::string> algorithms;
  std::vector<std::uint64_t> seeds = {1};
  std::string out = "bench_results";
  std::string policy;
  RunParams params;
};

// Flat key = value file; '#' starts a comment; unknown keys are rejected.
void apply_config_file(const std::string& path, BenchConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "datasets") {
        cfg.datasets = expand_dataset_args({value});
      } else if (key == "algorithms") {
        cfg.algorithms = split_list(value);
      } else if (key == "seeds") {
        cfg.seeds = parse_seeds(value);
      } else if (key == "out") {
        cfg.out = value;
      } else if (key == "policy") {
        cfg.policy = value;
      } else if (key == "polopt") {
        cfg.params.method = value;
      } else if (key == "test_mu") {
        cfg.params.test_mu = std::stod(value);
      } else if (key == "cal_period") {
        cfg.params.cal_period = std::stoi(value);
      } else if (key == "eps") {
        cfg.params.explorer.eps = std::stod(value);
      } else if (key == "eps0") {
        cfg.params.explorer.eps0 = std::stod(value);
      } else if (key == "eg_eta") {
        cfg.params.explorer.eg_eta = std::stod(value);
      } else if (key == "alpha") {
        cfg.params.explorer.alpha = std::stod(value);
      } else if (key == "tau") {
        cfg.params.explorer.tau = std::stod(value);
      } else if (key == "bag") {
        cfg.params.explorer.bag = std::stoi(value);
      } else if (key == "psi") {
        cfg.params.explorer.psi = std::stod(value);
      } else {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" +
                          key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value for '" +
                        key + "'");
    }
  }
}

int pool_size(std::size_t cells) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MELEE_THREADS")) {
    try {
      n = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError("MELEE_THREADS must be an integer");
    }
  }
  n = std::max(1, n);
  return static_cast<int>(std::min<std::size_t>(n, cells));
}

int cmd_bench(const BenchConfig& cfg) {
  if (cfg.datasets.empty()) throw ConfigError("bench needs datasets");
  if (cfg.algorithms.empty()) throw ConfigError("bench needs algorithms");
  std::optional<ExplorationPolicy> policy;
  for (const std::string& alg : cfg.algorithms) {
    if (alg == "melee") {
      if (cfg.policy.empty()) {
        throw ConfigError("the melee algorithm needs policy = <file>");
      }
      policy = load_policy(cfg.policy);
    } else {
      make_explorer(alg, cfg.params.explorer);  // validates the name
    }
  }

  const fs::path out_dir(cfg.out);
  const fs::path runs_dir = out_dir / "runs";
  fs::create_directories(runs_dir);

  struct Cell {
    std::string dataset;
    std::string algorithm;
    std::uint64_t seed;
    fs::path file;
  };
  std::vector<Cell> cells;
  for (const std::string& ds : cfg.datasets) {
    for (const std::string& alg : cfg.algorithms) {
      for (std::uint64_t seed : cfg.seeds) {
        const std::string stem = fs::path(ds).stem().string();
        const std::string key = alg + "|" + ds + "|" + std::to_string(seed);
        const std::string name = alg + "__" + stem + "__s" +
                                 std::to_string(seed) + "__" + hash8(key) + ".json";
        cells.push_back({ds, alg, seed, runs_dir / name});
      }
    }
  }

  // Completed cells are keyed by their file name: rerunning the same config
  // skips them.
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> skipped{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      try {
        if (fs::exists(cell.file)) {
          skipped.fetch_add(1);
          continue;
        }
        const RunResult result = execute_run(cell.dataset, cell.algorithm,
                                             cfg.params, policy, cell.seed);
        write_text_atomic(cell.file.string(),
                          run_result_json(result).dump(2) + "\n");
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(cells.size());
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < pool_size(cells.size()); ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  // Aggregate in a fixed order so reruns are byte-identical.
  std::vector<RunResult> results;
  for (const Cell& cell : cells) {
    std::ifstream in(cell.file);
    if (!in) throw DataError("missing benchmark cell " + cell.file.string());
    nlohmann::json j;
    in >> j;
    results.push_back(run_result_from_json(j));
  }
  write_results_json((out_dir / "results.json").string(), results);
  write_winloss_csv((out_dir / "winloss.csv").string(), win_loss_matrix(results));
  write_cdf_csv((out_dir / "cdf.csv").string(), relative_reward_cdf(results));

  std::cout << "ran " << (cells.size() - skipped.load()) << " cells, skipped "
            << skipped.load() << " existing; results in " << cfg.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contextual bandit exploration toolkit"};
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "generate synthetic task CSVs");
  gen->add_option("--count", gen_args.count, "number of tasks");
  gen->add_option("--size", gen_args.size, "rows per task");
  gen->add_option("--seed", gen_args.seed, "suite seed");
  gen->add_option("--out", gen_args.out, "output directory")->required();

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train an exploration policy");
  train->add_option("--tasks", train_args.tasks,
                    "task CSVs (files, comma lists or directories)")
      ->required();
  train->add_option("--mu", train_args.mu, "roll-in exploration rate");
  train->add_option("--nval", train_args.n_val, "validation rows per episode");
  train->add_option("--rounds", train_args.rounds, "outer training rounds");
  train->add_option("--seed", train_args.seed, "training seed");
  train->add_option("--method", train_args.method, "policy optimizer: direct|ips");
  train->add_option("--out", train_args.out, "output policy file");
  train->add_option("--log", train_args.log, "training progress log (ndjson)");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run one explorer on one dataset");
  run->add_option("--dataset", run_args.dataset, "dataset CSV")->required();
  run->add_option("--explorer", run_args.explorer, "explorer name")->required();
  run->add_option("--policy", run_args.policy, "trained policy (for melee)");
  run->add_option("--seed", run_args.seed, "stream seed");
  run->add_option("--out", run_args.out, "result JSON path");
  run->add_option("--history", run_args.history, "interaction log (ndjson)");
  run->add_option("--method", run_args.params.method, "policy optimizer");
  run->add_option("--test-mu", run_args.params.test_mu, "melee mixture rate");
  run->add_option("--cal-period", run_args.params.cal_period,
                  "calibration refit period");
  run->add_option("--eps", run_args.params.explorer.eps, "epsilon-greedy rate");
  run->add_option("--eps0", run_args.params.explorer.eps0,
                  "epsilon-decreasing numerator");
  run->add_option("--eg-eta", run_args.params.explorer.eg_eta, "EG learning rate");
  run->add_option("--alpha", run_args.params.explorer.alpha, "linucb width");
  run->add_option("--tau", run_args.params.explorer.tau, "tau-first fraction");
  run->add_option("--bag", run_args.params.explorer.bag, "cover bag size");
  run->add_option("--psi", run_args.params.explorer.psi, "cover smoothing");

  BenchConfig bench_cfg;
  std::string bench_config_path;
  std::string bench_datasets, bench_algorithms, bench_seeds;
  std::string bench_out, bench_policy;
  CLI::App* bench = app.add_subcommand("bench", "run a benchmark grid");
  bench->add_option("--config", bench_config_path, "flat key = value config file");
  bench->add_option("--datasets", bench_datasets, "override dataset list");
  bench->add_option("--algorithms", bench_algorithms, "override algorithm list");
  bench->add_option("--seeds", bench_seeds, "override seed list");
  bench->add_option("--out", bench_out, "override output directory");
  bench->add_option("--policy", bench_policy, "override melee policy file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args);
    if (train->parsed()) return cmd_train(train_args);
    if (run->parsed()) return cmd_run(run_args);
    if (bench->parsed()) {
      // precedence: defaults < config file < flags
      if (!bench_config_path.empty()) {
        apply_config_file(bench_config_path, bench_cfg);
      }
      if (!bench_datasets.empty()) {
        bench_cfg.datasets = expand_dataset_args({bench_datasets});
      }
      if (!bench_algorithms.empty()) {
        bench_cfg.algorithms = split_list(bench_algorithms);
      }
      if (!bench_seeds.empty()) bench_cfg.seeds = parse_seeds(bench_seeds);
      if (!bench_out.empty()) bench_cfg.out = bench_out;
      if (!bench_policy.empty()) bench_cfg.policy = bench_policy;
      return cmd_bench(bench_cfg);
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
