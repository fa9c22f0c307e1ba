#include "doctest.h"

#include <stdexcept>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "crystal/cli.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("CRYSTAL_TEST_TMP");
  fs::path root = env ? fs::path(env) : fs::temp_directory_path() / "crystal_cli_tests";
  fs::path p = root / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "crystal_drift");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return crystal::cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes a trajectory and a manifest") {
  auto dir = scratch("simulate");
  CHECK(run({"simulate", "--n", "2", "--bc", "zero", "--betas", "1,2,3", "--horizon", "100", "--seed", "7", "--out",
             dir.string()}) == 0);
  CHECK(slurp(dir / "trajectory.csv").rfind("time,site_1,site_2\n", 0) == 0);
  auto m = load(dir / "manifest.json");
  CHECK(m["subcommand"] == "simulate");
  CHECK(m["config"]["seed"] == "7");
  CHECK(m["config"]["betas"] == "1,2,3");
  CHECK(m.contains("wall_time_s"));
  CHECK(m.contains("timestamp"));
}

TEST_CASE("validation errors exit with 1") {
  auto dir = scratch("invalid");
  CHECK(run({"simulate", "--n", "2", "--out", dir.string()}) == 1);  // no seed
  CHECK(run({"simulate", "--betas", "3,2,1", "--seed", "1", "--out", dir.string()}) == 1);
  CHECK(run({"simulate", "--bc", "open", "--seed", "1", "--out", dir.string()}) == 1);
  CHECK(run({"teleport", "--seed", "1"}) == 1);
  CHECK(run({}) == 1);
  CHECK(run({"stationary", "--n", "6", "--out", dir.string()}) == 1);
  CHECK(run({"martingale", "--alpha", "0.5", "--seed", "1", "--out", dir.string()}) == 1);
  CHECK(run({"midpoint-check", "--betas", "1,2.5,3", "--seed", "1", "--replicas", "10", "--out", dir.string()}) == 1);
  CHECK(run({"--help"}) == 0);
}

TEST_CASE("drift-check: example 3 on a path of three columns") {
  auto dir = scratch("drift");
  CHECK(run({"drift-check", "--example", "3", "--graph", "path:3", "--betas", "0.2,0.4,0.8", "--out", dir.string()}) ==
        0);
  auto rep = load(dir / "drift_report.json");
  CHECK(rep["conditions"]["pass"] == true);
  CHECK(rep["pass"] == true);
  CHECK(slurp(dir / "kernel_rows.csv").rfind("pattern_id,move,probability\n", 0) == 0);
  // a margin the kernel cannot meet fails the check
  CHECK(run({"drift-check", "--example", "3", "--graph", "path:3", "--betas", "0.2,0.4,0.8", "--margin", "0.5",
             "--out", dir.string()}) == 3);
  CHECK(load(dir / "drift_report.json")["pass"] == false);
}

TEST_CASE("reruns with the same seed are byte-identical, independent of threads") {
  auto a = scratch("det_a"), b = scratch("det_b");
  const std::vector<std::string> common{"--n", "2", "--horizon", "50", "--replicas", "3000", "--seed", "21"};
  auto with = [&](const fs::path& dir, const std::string& threads) {
    std::vector<std::string> args{"tails"};
    args.insert(args.end(), common.begin(), common.end());
    args.insert(args.end(), {"--threads", threads, "--tv-max", "1", "--slope-tol", "1", "--r2-min", "0", "--out",
                             dir.string()});
    return run(args);
  };
  CHECK(with(a, "1") == 0);
  CHECK(with(b, "3") == 0);
  CHECK(slurp(a / "tails_delta_1.csv") == slurp(b / "tails_delta_1.csv"));
  CHECK(slurp(a / "tails.json") == slurp(b / "tails.json"));
}

TEST_CASE("config file values are overridden by flags") {
  auto dir = scratch("config");
  {
    std::ofstream cfg(dir / "run.toml");
    cfg << "betas = \"1,2,4\"\nn = 3\nseed = 5\nhorizon = 10\n";
  }
  CHECK(run({"simulate", "--config", (dir / "run.toml").string(), "--out", dir.string()}) == 0);
  auto m = load(dir / "manifest.json");
  CHECK(m["config"]["betas"] == "1,2,4");
  CHECK(m["config"]["n"] == "3");
  CHECK(slurp(dir / "trajectory.csv").rfind("time,site_1,site_2,site_3\n", 0) == 0);
  CHECK(run({"simulate", "--config", (dir / "run.toml").string(), "--n", "2", "--out", dir.string()}) == 0);
  CHECK(load(dir / "manifest.json")["config"]["n"] == "2");
}

TEST_CASE("check-style subcommands report pass and fail through the exit code") {
  auto dir = scratch("checks");
  CHECK(run({"couple", "--n", "3", "--replicas", "50", "--horizon", "20", "--seed", "2", "--out", dir.string()}) == 0);
  CHECK(load(dir / "couple.json")["domination_violations"] == 0);
  CHECK(run({"aux", "--replicas", "50", "--horizon", "20", "--seed", "2", "--out", dir.string()}) == 0);
  CHECK(run({"stationary", "--n", "2", "--truncation", "30", "--out", dir.string()}) == 0);
  CHECK(load(dir / "stationary.json")["birth_death_tv"].get<double>() < 1e-10);
  CHECK(run({"speed", "--n", "2", "--horizon", "100", "--replicas", "30", "--seed", "2", "--out", dir.string()}) == 0);
  CHECK(run({"martingale", "--replicas", "500", "--seed", "2", "--out", dir.string()}) == 0);
  CHECK(slurp(dir / "martingale_gap.csv").rfind("time,mean,se\n", 0) == 0);
}

}  // TEST_SUITE
