#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "switchbid/fluid_oracle.hpp"
#include "switchbid/policy.hpp"

namespace switchbid {

/// Builds the scenario for horizon T. Trace scenarios depend on the T-row
/// window; synthetic ones ignore it.
using ScenarioFactory = std::function<ScenarioSpec(std::size_t horizon)>;

struct OracleSettings {
  std::size_t mc_samples = 10000;
  std::size_t mc_paths = 200;
  bool want_fixed = false;
  std::uint64_t seed = 20240229;
  bool use_cache = true;
  std::filesystem::path cache_dir = ".switchbid_cache";
  /// Extra text mixed into the cache key, e.g. a scenario file's contents.
  std::string cache_salt;
};

struct OracleValues {
  /// Per period.
  double v_mix = 0.0;
  SaddleSolution saddle;
  /// Total over the horizon, when requested.
  std::optional<double> v_fixed;
  bool from_cache = false;
};

/// v_mix at the unscaled budget (and v_fixed when requested) for one
/// scenario and horizon, read from or written to the cache directory.
OracleValues compute_oracle(const ScenarioSpec& scenario, std::size_t horizon, const OracleSettings& settings);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

struct ExperimentConfig {
  std::string scenario_label;
  ScenarioFactory make_scenario;
  /// True when v_mix depends on the horizon (trace windows).
  bool oracle_per_horizon = false;
  std::vector<std::size_t> horizons;
  double rho = 1.0;
  std::vector<PolicyKind> policies;
  PolicyParams params;
  /// Inclusive seed range.
  std::uint64_t seed_first = 0;
  std::uint64_t seed_last = 0;
  OracleSettings oracle;
  std::size_t jobs = 1;
  /// Emit progress lines on stderr.
  bool verbose = false;

  void validate() const;
};

struct RunRow {
  std::string scenario;
  PolicyKind policy = PolicyKind::spucb;
  double alpha = 0.0;
  double rho = 0.0;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  double total_reward = 0.0;
  double regret_mix = 0.0;
  double cr_mix = 0.0;
  std::optional<double> cr_star;
  std::size_t solve_count = 0;
  /// Per-round trace, kept only when the policy params record it.
  std::vector<RoundLog> log;
};

struct Moments {
  double mean = 0.0;
  /// Sample standard deviation (n - 1); zero for a single value.
  double std = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& values);

struct SummaryRow {
  std::string scenario;
  PolicyKind policy = PolicyKind::spucb;
  double alpha = 0.0;
  double rho = 0.0;
  std::size_t horizon = 0;
  std::size_t runs = 0;
  double v_mix = 0.0;
  std::optional<double> v_fixed;
  Moments total_reward;
  Moments regret;
  Moments regret_per_sqrt_t;
  Moments cr_mix;
  std::optional<Moments> cr_star;
};

struct ExperimentResult {
  std::vector<RunRow> runs;
  std::vector<SummaryRow> summary;
  std::map<std::size_t, OracleValues> oracles;
};

/// Runs every (policy, T, seed) triple, in parallel over `jobs` workers.
/// Rows come back ordered by (T, policy, seed) whatever the completion order.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Independent stream for one run, derived from (seed, policy kind).
Rng run_rng(std::uint64_t seed, PolicyKind kind);

void write_runs_csv(std::ostream& out, const ExperimentResult& result, const std::string& comment);
void write_summary_csv(std::ostream& out, const ExperimentResult& result, const std::string& comment);
void write_trajectory_csv(std::ostream& out, const ExperimentResult& result);

struct OracleReport {
  std::string scenario;
  double rho = 0.0;
  std::size_t horizon = 0;
  std::size_t mc_samples = 0;
  std::size_t mc_paths = 0;
  double v_mix = 0.0;
  double total_mix = 0.0;
  double v_fixed = 0.0;
  /// T v_mix / v_fixed.
  double gap = 0.0;
};

OracleReport cmd_oracle(const ScenarioSpec& scenario, std::size_t horizon, OracleSettings settings);
void write_oracle_csv(std::ostream& out, const OracleReport& report);

/// Parses "a..b" (inclusive) or a single integer.
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text);
/// Parses a comma separated list of positive integers.
std::vector<std::size_t> parse_horizons(const std::string& text);
/// "all" or a comma separated list of policy names.
std::vector<PolicyKind> parse_policies(const std::string& text);

}  // namespace switchbid
