#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = MELEE_CLI_PATH;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd =
      kCli + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WEXITSTATUS(status);
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("melee_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gen is deterministic and validates count") {
  const fs::path dir = scratch_dir("gen");
  CHECK(run_cli("gen --count 3 --size 60 --seed 5 --out " + (dir / "a").string(),
                dir)
            .exit_code == 0);
  CHECK(run_cli("gen --count 3 --size 60 --seed 5 --out " + (dir / "b").string(),
                dir)
            .exit_code == 0);
  for (const std::string name :
       {"manifest.txt", "synth_000.csv", "synth_001.csv", "synth_002.csv"}) {
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    CHECK(!slurp(dir / "a" / name).empty());
  }
  CHECK(run_cli("gen --count 0 --out " + (dir / "c").string(), dir).exit_code == 2);
  fs::remove_all(dir);
}

TEST_CASE("run validates explorer names and is reproducible") {
  const fs::path dir = scratch_dir("run");
  REQUIRE(run_cli("gen --count 1 --size 60 --seed 2 --out " + (dir / "t").string(),
                  dir)
              .exit_code == 0);
  const std::string ds = (dir / "t" / "synth_000.csv").string();

  const CliResult bad =
      run_cli("run --dataset " + ds + " --explorer warpdrive", dir);
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.find("epsilon-greedy") != std::string::npos);

  const std::string r1 = (dir / "r1.json").string();
  const std::string r2 = (dir / "r2.json").string();
  CHECK(run_cli("run --dataset " + ds +
                    " --explorer epsilon-greedy --eps 0.0 --seed 11 --out " + r1,
                dir)
            .exit_code == 0);
  CHECK(run_cli("run --dataset " + ds +
                    " --explorer epsilon-greedy --eps 0.0 --seed 11 --out " + r2,
                dir)
            .exit_code == 0);
  CHECK(slurp(r1) == slurp(r2));
  CHECK(!slurp(r1).empty());

  // missing dataset file is a data error
  CHECK(run_cli("run --dataset " + (dir / "nope.csv").string() +
                    " --explorer epsilon-greedy",
                dir)
            .exit_code == 3);
  fs::remove_all(dir);
}

TEST_CASE("run can dump the interaction history as ndjson") {
  const fs::path dir = scratch_dir("hist");
  REQUIRE(run_cli("gen --count 1 --size 50 --seed 2 --out " + (dir / "t").string(),
                  dir)
              .exit_code == 0);
  const std::string ds = (dir / "t" / "synth_000.csv").string();
  const std::string hist = (dir / "h.ndjson").string();
  CHECK(run_cli("run --dataset " + ds + " --explorer tau-first --seed 3 --out " +
                    (dir / "r.json").string() + " --history " + hist,
                dir)
            .exit_code == 0);
  std::ifstream in(hist);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CHECK(line.find("\"x\"") != std::string::npos);
    CHECK(line.find("\"a\"") != std::string::npos);
    CHECK(line.find("\"r\"") != std::string::npos);
    CHECK(line.find("\"p\"") != std::string::npos);
    ++rows;
  }
  CHECK(rows == 20);  // 50 rows minus the 30-row holdout
  fs::remove_all(dir);
}

TEST_CASE("train writes a policy and a progress log") {
  const fs::path dir = scratch_dir("train");
  REQUIRE(run_cli("gen --count 2 --size 70 --seed 4 --out " + (dir / "t").string(),
                  dir)
              .exit_code == 0);
  const CliResult missing = run_cli("train --rounds 1", dir);
  CHECK(missing.exit_code == 2);

  const auto start = std::chrono::steady_clock::now();
  CHECK(run_cli("train --tasks " + (dir / "t").string() +
                    " --rounds 2 --seed 6 --out " + (dir / "p.json").string(),
                dir)
            .exit_code == 0);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  CHECK(elapsed < 10.0);
  CHECK(fs::exists(dir / "p.json"));
  CHECK(fs::exists(dir / "p.json.log"));
  const std::string policy = slurp(dir / "p.json");
  CHECK(policy.find("\"version\"") != std::string::npos);
  CHECK(policy.find("\"feature_len\"") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("bench honors the config file, resumes, and rejects unknown keys") {
  const fs::path dir = scratch_dir("bench");
  REQUIRE(run_cli("gen --count 2 --size 60 --seed 8 --out " + (dir / "t").string(),
                  dir)
              .exit_code == 0);
  {
    std::ofstream cfg(dir / "bench.cfg");
    cfg << "# small grid\n";
    cfg << "datasets = " << (dir / "t").string() << "\n";
    cfg << "algorithms = epsilon-greedy,tau-first\n";
    cfg << "seeds = 1,2\n";
    cfg << "out = " << (dir / "results").string() << "\n";
    cfg << "eps = 0.0\n";
  }
  const CliResult first =
      run_cli("bench --config " + (dir / "bench.cfg").string(), dir);
  CHECK(first.exit_code == 0);
  CHECK(fs::exists(dir / "results" / "results.json"));
  CHECK(fs::exists(dir / "results" / "winloss.csv"));
  CHECK(fs::exists(dir / "results" / "cdf.csv"));
  int cell_files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "results" / "runs")) {
    cell_files += entry.path().extension() == ".json";
  }
  CHECK(cell_files == 8);  // 2 datasets x 2 algorithms x 2 seeds

  // second run resumes by skipping every cell
  const CliResult second =
      run_cli("bench --config " + (dir / "bench.cfg").string(), dir);
  CHECK(second.exit_code == 0);
  CHECK(second.out.find("skipped 8") != std::string::npos);

  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "algorithmz = epsilon-greedy\n";
  }
  const CliResult bad = run_cli("bench --config " + (dir / "bad.cfg").string(), dir);
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.find("algorithmz") != std::string::npos);

  // flags override the file: swap the algorithm list into a fresh out dir
  const CliResult overridden = run_cli(
      "bench --config " + (dir / "bench.cfg").string() +
          " --algorithms epsilon-greedy,epsilon-decreasing --out " +
          (dir / "results2").string(),
      dir);
  CHECK(overridden.exit_code == 0);
  const std::string winloss = slurp(dir / "results2" / "winloss.csv");
  CHECK(winloss.find("epsilon-decreasing") != std::string::npos);
  CHECK(winloss.find("tau-first") == std::string::npos);
  fs::remove_all(dir);
}
