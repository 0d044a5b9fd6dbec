#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
};

Outcome run(const std::string& args) {
  const auto log = fs::temp_directory_path() / ("switchbid_cli_" + std::to_string(std::random_device{}()));
  const std::string cmd = std::string(SWITCHBID_CLI) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(log);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path scratch(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("switchbid_cli_" + tag + "_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') out += line + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run("").code == 1);
  CHECK(run("simulate --T 100").code == 1);
  CHECK(run("simulate --scenario s0 --T abc --seeds 1..2 --out /dev/null").code == 1);
  auto bad = run("simulate --scenario nowhere --T 100 --seeds 1..2 --out /dev/null");
  CHECK(bad.code == 1);
  CHECK(bad.out.find("s0, s4, example1") != std::string::npos);
  CHECK(run("simulate --scenario s0 --T 100 --seeds 5..1 --out /dev/null").code == 1);
  CHECK(run("simulate --scenario s0 --T 100 --seeds 1..2 --policy ucb --out /dev/null").code == 1);
  CHECK(run("--help").code == 0);
}

TEST_CASE("runtime failures exit with 2") {
  auto missing = run("trace-simulate --trace /nonexistent/batch_task.csv --T 50 --seeds 1..1 --out /dev/null");
  CHECK(missing.code == 2);
  CHECK(missing.out.find("not found") != std::string::npos);
  CHECK(run("validate --inject-fault --filter tie").code == 2);
}

TEST_CASE("validate reports per-property lines") {
  auto r = run("validate --filter tie");
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS tie_separation") != std::string::npos);
  auto none = run("validate --filter nothing_matches");
  CHECK(none.code == 0);
  CHECK(none.out.find("0 properties run") != std::string::npos);
}

TEST_CASE("simulate writes deterministic CSVs") {
  const auto dir = scratch("simulate");
  const std::string common = "simulate --scenario s0 --rho 0.7 --T 80,120 --seeds 1..3 --policy all --alpha 1.5 "
                             "--mc-samples 300 --cache-dir " + (dir / "cache").string();
  REQUIRE(run(common + " --jobs 1 --out " + (dir / "a.csv").string()).code == 0);
  REQUIRE(run(common + " --jobs 2 --no-cache --out " + (dir / "b.csv").string()).code == 0);
  const auto a = slurp(dir / "a.csv");
  CHECK(a.rfind("# switchbid simulate", 0) == 0);
  CHECK(strip_comments(a) == strip_comments(slurp(dir / "b.csv")));
  CHECK(strip_comments(slurp(dir / "a.summary.csv")) == strip_comments(slurp(dir / "b.summary.csv")));
  CHECK(fs::exists(dir / "a.trajectory.csv"));
  REQUIRE(run(common + " --no-trajectory-log --out " + (dir / "c.csv").string()).code == 0);
  CHECK_FALSE(fs::exists(dir / "c.trajectory.csv"));
  CHECK(strip_comments(a) == strip_comments(slurp(dir / "c.csv")));
  fs::remove_all(dir);
}

TEST_CASE("oracle prints the gap and writes a CSV") {
  const auto dir = scratch("oracle");
  auto r = run("oracle --scenario example1 --T 100 --mc-paths 100 --no-cache --out " + (dir / "o.csv").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("gap") != std::string::npos);
  CHECK(slurp(dir / "o.csv").rfind("scenario,rho,T,", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("scenario files are accepted") {
  const auto dir = scratch("file");
  {
    std::ofstream f(dir / "pair.json");
    f << R"({"name": "pair", "K": 2, "d": 1, "R_max": 1, "A_max": 1, "b0": [0.5],
             "configs": [{"kind": "uniform", "r": [0, 1], "a_lo": [0.5], "a_hi": [1]},
                         {"kind": "uniform", "r": [0, 0.5], "a_lo": [0.1], "a_hi": [0.2]}]})";
  }
  auto r = run("simulate --scenario " + (dir / "pair.json").string() + " --T 50 --seeds 1..2 --policy spucb "
               "--mc-samples 200 --no-cache --out " + (dir / "out.csv").string());
  CHECK(r.code == 0);
  CHECK(slurp(dir / "out.csv").find("spucb") != std::string::npos);
  fs::remove_all(dir);
}
