// switchbid command-line driver: simulate, oracle, validate, trace-simulate.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "switchbid/harness.hpp"
#include "switchbid/scenarios.hpp"
#include "switchbid/trace_ingest.hpp"
#include "switchbid/validate.hpp"

namespace fs = std::filesystem;
using namespace switchbid;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

// Options shared by simulate and trace-simulate.
struct SweepArgs {
  std::string policy = "all";
  std::string horizons;
  double rho = 1.0;
  double alpha = 0.1;
  double c_g = 0.0707;
  std::string seeds;
  std::string out;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  bool no_cache = false;
  bool no_trajectory = false;
  bool cr_star = false;
  std::size_t mc_samples = 10000;
  std::size_t mc_paths = 200;
  std::string cache_dir = ".switchbid_cache";
  bool verbose = false;
};

void add_sweep_options(CLI::App* cmd, SweepArgs& a) {
  cmd->add_option("--policy", a.policy, "spucb|greedy|random|oracle|onehot|all, or a comma list")
      ->capture_default_str();
  cmd->add_option("--alpha", a.alpha, "Confidence-bonus scale")->capture_default_str();
  cmd->add_option("--c-g", a.c_g, "Radius constant c_g")->capture_default_str();
  cmd->add_option("--out", a.out, "Per-run CSV; the summary goes next to it")->required();
  cmd->add_option("--jobs", a.jobs, "Worker threads")->capture_default_str();
  cmd->add_flag("--no-cache", a.no_cache, "Recompute oracle values instead of reading the cache");
  cmd->add_flag("--no-trajectory-log", a.no_trajectory, "Skip the per-round trajectory CSV");
  cmd->add_flag("--cr-star", a.cr_star, "Also estimate v_fixed and report cr_star");
  cmd->add_option("--mc-samples", a.mc_samples, "Samples per configuration for v_mix")->capture_default_str();
  cmd->add_option("--mc-paths", a.mc_paths, "Paths for v_fixed")->capture_default_str();
  cmd->add_option("--cache-dir", a.cache_dir, "Oracle cache directory")->capture_default_str();
  cmd->add_flag("-v,--verbose", a.verbose, "Progress on stderr");
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  return p.string() + suffix;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string header_comment(const std::string& command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("switchbid {} at {:%Y-%m-%dT%H:%M:%SZ}; std columns are sample standard deviations (n-1)",
                     command, fmt::gmtime(now));
}

std::string describe(const SweepArgs& a, const std::string& scenario) {
  return fmt::format("--scenario {} --policy {} --T {} --rho {} --alpha {} --seeds {}", scenario, a.policy,
                     a.horizons, a.rho, a.alpha, a.seeds);
}

ExperimentConfig base_config(const SweepArgs& a) {
  ExperimentConfig c;
  c.horizons = parse_horizons(a.horizons);
  c.rho = a.rho;
  c.policies = parse_policies(a.policy);
  c.params.alpha = a.alpha;
  c.params.c_g = a.c_g;
  c.params.record_log = !a.no_trajectory;
  std::tie(c.seed_first, c.seed_last) = parse_seed_range(a.seeds);
  c.oracle.mc_samples = a.mc_samples;
  c.oracle.mc_paths = a.mc_paths;
  c.oracle.want_fixed = a.cr_star;
  c.oracle.use_cache = !a.no_cache;
  c.oracle.cache_dir = a.cache_dir;
  c.jobs = a.jobs;
  c.verbose = a.verbose;
  return c;
}

void write_outputs(const SweepArgs& a, const ExperimentResult& result, const std::string& comment) {
  const fs::path out(a.out);
  {
    auto f = open_out(out);
    write_runs_csv(f, result, comment);
  }
  const auto summary_path = sibling(out, ".summary.csv");
  {
    auto f = open_out(summary_path);
    write_summary_csv(f, result, comment);
  }
  if (!a.no_trajectory) {
    auto f = open_out(sibling(out, ".trajectory.csv"));
    write_trajectory_csv(f, result);
  }
  for (const auto& s : result.summary) {
    fmt::print("{:<8} T={:<6} runs={:<3} regret={:.2f} ± {:.2f}  regret/sqrt(T)={:.3f} ± {:.3f}  cr_mix={:.4f} ± {:.4f}",
               to_string(s.policy), s.horizon, s.runs, s.regret.mean, s.regret.std, s.regret_per_sqrt_t.mean,
               s.regret_per_sqrt_t.std, s.cr_mix.mean, s.cr_mix.std);
    if (s.cr_star) fmt::print("  cr_star={:.4f} ± {:.4f}", s.cr_star->mean, s.cr_star->std);
    fmt::print("\n");
  }
  fmt::print("wrote {} and {}\n", out.string(), summary_path.string());
}

std::string file_salt(const std::string& name_or_path) {
  std::error_code ec;
  if (!fs::is_regular_file(name_or_path, ec)) return {};
  std::ifstream in(name_or_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_simulate(SweepArgs& a, const std::string& scenario) {
  ExperimentConfig c = base_config(a);
  // Fail early, with the list of valid names, before any oracle work.
  (void)make_scenario(scenario, a.rho);
  c.scenario_label = scenario;
  c.make_scenario = [scenario, rho = a.rho](std::size_t) { return make_scenario(scenario, rho); };
  c.oracle.cache_salt = file_salt(scenario);
  auto result = run_experiment(c);
  write_outputs(a, result, header_comment("simulate " + describe(a, scenario)));
  return 0;
}

int cmd_trace_simulate(SweepArgs& a, const std::string& trace, double sigma) {
  if (trace.empty()) {
    fmt::print(stderr, "error: no trace given; pass --trace or set TRACE_PATH\n");
    return kRuntimeError;
  }
  if (!fs::exists(trace)) {
    fmt::print(stderr, "error: trace file {} not found\n", trace);
    return kRuntimeError;
  }
  ExperimentConfig c = base_config(a);
  c.scenario_label = "trace";
  c.oracle_per_horizon = true;
  c.make_scenario = [trace, sigma, rho = a.rho](std::size_t T) {
    auto parsed = parse_trace(trace, T);
    return trace_scenario(std::move(parsed.arrivals), RegimeTable{}, sigma, rho);
  };
  std::error_code ec;
  const auto stamp = fs::last_write_time(trace, ec).time_since_epoch().count();
  c.oracle.cache_salt = fmt::format("{}|{}|{}|sigma={}", fs::absolute(trace).string(), fs::file_size(trace, ec),
                                    stamp, sigma);
  auto result = run_experiment(c);
  write_outputs(a, result, header_comment("trace-simulate " + describe(a, trace)));
  return 0;
}

int cmd_oracle_report(const std::string& scenario, double rho, std::size_t T, const OracleSettings& settings,
                      const std::string& out) {
  auto spec = make_scenario(scenario, rho);
  OracleSettings s = settings;
  s.cache_salt = file_salt(scenario);
  const auto start = std::chrono::steady_clock::now();
  auto r = cmd_oracle(spec, T, s);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fmt::print("scenario {}  rho {}  T {}  (mc-samples {}, mc-paths {}, {:.1f} s)\n", r.scenario, r.rho, r.horizon,
             r.mc_samples, r.mc_paths, secs);
  fmt::print("  v_mix per period  {:.6f}\n  T * v_mix         {:.4f}\n  v_fixed total     {:.4f}\n  gap               {:.4f}\n",
             r.v_mix, r.total_mix, r.v_fixed, r.gap);
  if (!out.empty()) {
    auto f = open_out(out);
    write_oracle_csv(f, r);
  }
  return 0;
}

int cmd_validate_run(const std::string& filter, bool inject_fault) {
  ValidateOptions opt;
  opt.filter = filter;
  if (inject_fault) opt.admission = Threshold::weak;
  auto report = run_validation(opt, [](const PropertyResult& r) {
    fmt::print("{} {:<26} {:>7.2f} s  {}\n", r.passed ? "PASS" : "FAIL", r.name, r.seconds, r.detail);
    std::fflush(stdout);
  });
  if (report.results.empty()) {
    fmt::print(stderr, "warning: 0 properties run (filter '{}' matches none of {})\n", filter,
               fmt::join(property_names(), ", "));
    return 0;
  }
  std::size_t failed = 0;
  for (const auto& r : report.results) failed += r.passed ? 0 : 1;
  fmt::print("{} properties run, {} failed\n", report.results.size(), failed);
  return failed == 0 ? 0 : kRuntimeError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switching-aware bid-price simulator"};
  app.require_subcommand(1);

  SweepArgs sim;
  std::string sim_scenario;
  auto* simulate = app.add_subcommand("simulate", "Multi-seed policy sweep on a built-in or file scenario");
  simulate->add_option("--scenario", sim_scenario, "s0, s4, example1 or a JSON scenario file")->required();
  simulate->add_option("--T", sim.horizons, "Horizon or comma list of horizons")->required();
  simulate->add_option("--rho", sim.rho, "Budget scale")->capture_default_str();
  simulate->add_option("--seeds", sim.seeds, "Inclusive seed range a..b")->required();
  add_sweep_options(simulate, sim);

  std::string or_scenario, or_out;
  double or_rho = 1.0;
  std::size_t or_T = 0;
  OracleSettings or_settings;
  bool or_no_cache = false;
  std::string or_cache_dir = ".switchbid_cache";
  auto* oracle = app.add_subcommand("oracle", "Switching-aware and fixed-configuration benchmarks");
  oracle->add_option("--scenario", or_scenario, "s0, s4, example1 or a JSON scenario file")->required();
  oracle->add_option("--rho", or_rho, "Budget scale")->capture_default_str();
  oracle->add_option("--T", or_T, "Horizon")->required();
  oracle->add_option("--mc-samples", or_settings.mc_samples, "Samples per configuration")->capture_default_str();
  oracle->add_option("--mc-paths", or_settings.mc_paths, "Paths for v_fixed")->capture_default_str();
  oracle->add_option("--out", or_out, "CSV report path");
  oracle->add_flag("--no-cache", or_no_cache, "Recompute instead of reading the cache");
  oracle->add_option("--cache-dir", or_cache_dir, "Oracle cache directory")->capture_default_str();

  std::string filter;
  bool inject_fault = false;
  auto* validate = app.add_subcommand("validate", "Run the property suites");
  validate->add_option("--filter", filter, "Only properties whose name contains this");
  // Test hook: weak admission must be caught by tie_separation.
  validate->add_flag("--inject-fault", inject_fault)->group("");

  SweepArgs tr;
  tr.horizons = "5000";
  tr.alpha = 0.01;
  tr.seeds = "42..91";
  std::string trace_path;
  if (const char* env = std::getenv("TRACE_PATH")) trace_path = env;
  double sigma = 0.1;
  auto* trace = app.add_subcommand("trace-simulate", "Sweep over a batch_task trace replay");
  trace->add_option("--trace", trace_path, "batch_task CSV (default: $TRACE_PATH)");
  trace->add_option("--T", tr.horizons, "Horizon or comma list")->capture_default_str();
  trace->add_option("--rho", tr.rho, "Budget scale")->capture_default_str();
  trace->add_option("--seeds", tr.seeds, "Inclusive seed range a..b")->capture_default_str();
  trace->add_option("--sigma", sigma, "Reward noise standard deviation")->capture_default_str();
  add_sweep_options(trace, tr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*simulate) return cmd_simulate(sim, sim_scenario);
    if (*oracle) {
      or_settings.use_cache = !or_no_cache;
      or_settings.cache_dir = or_cache_dir;
      return cmd_oracle_report(or_scenario, or_rho, or_T, or_settings, or_out);
    }
    if (*validate) return cmd_validate_run(filter, inject_fault);
    if (*trace) return cmd_trace_simulate(tr, trace_path, sigma);
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntimeError;
  }
  return kUsageError;
}
