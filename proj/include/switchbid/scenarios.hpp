#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "switchbid/core_model.hpp"

namespace switchbid {

/// Independent Gaussians for the reward and each consumption coordinate,
/// truncated by rejection to [lower, R_max] and [lower, A_max].
struct GaussianConfig {
  double mu_r = 0.0;
  double sigma_r = 1.0;
  Vec mu_a;
  Vec sigma_a;
  double lower = 0.01;
};

/// Reward ~ U(r_lo, r_hi), consumption coordinate i ~ U(a_lo[i], a_hi[i]).
struct UniformConfig {
  double r_lo = 0.0;
  double r_hi = 1.0;
  Vec a_lo;
  Vec a_hi;
};

/// Reward ~ U(r_lo, r_hi), consumption e_resource plus U(-noise, noise) on
/// every coordinate, clipped below at zero.
struct OrthogonalUnitConfig {
  std::size_t resource = 0;
  double r_lo = 0.0;
  double r_hi = 1.0;
  double noise = 0.0;
};

using ConfigDistribution = std::variant<GaussianConfig, UniformConfig, OrthogonalUnitConfig>;

/// i.i.d. arrivals with one distribution per configuration.
class SyntheticArrivals : public ArrivalModel {
 public:
  /// A negative `jitter` disables clip_and_jitter, leaving the draw as the
  /// distribution produced it.
  SyntheticArrivals(std::vector<ConfigDistribution> configs, std::size_t dim, double reward_max,
                    double consumption_max, double jitter = -1.0);

  RewardResourcePair draw(std::size_t config, std::size_t round, Rng& rng) const override;

  const std::vector<ConfigDistribution>& configs() const { return configs_; }

 private:
  std::vector<ConfigDistribution> configs_;
  std::size_t dim_;
  double reward_max_;
  double consumption_max_;
  double jitter_;
};

/// N(mu, sigma^2) conditioned on [lo, hi] by rejection. Throws
/// std::runtime_error after `max_attempts` misses.
double truncated_normal(double mu, double sigma, double lo, double hi, Rng& rng,
                        int max_attempts = 1000);

/// Clips r to [0, R_max] and each a[i] to [0, A_max], adds U(-eta, eta) to r
/// and clips r again.
RewardResourcePair clip_and_jitter(double reward, Vec consumption, double reward_max,
                                   double consumption_max, double eta, Rng& rng);

/// Five truncated-Gaussian configurations over three resources;
/// b = rho * [0.8, 0.2, 0.2].
ScenarioSpec make_s0(double rho);

/// Two near-deterministic configurations, each loading one of two resources;
/// b = rho * [0.5, 0.5].
ScenarioSpec make_s4(double rho);

/// Uniform(0, 2) rewards with orthogonal unit consumption, b = rho * [0.5, 0.5].
ScenarioSpec make_example1(double rho = 1.0);

/// Names accepted by make_scenario besides file paths.
std::vector<std::string> builtin_scenarios();

/// Builds a built-in scenario by name, or loads a JSON scenario file.
/// Throws std::invalid_argument listing the valid names when neither works.
ScenarioSpec make_scenario(const std::string& name_or_path, double rho);

/// Parses a scenario document:
/// {"name", "K", "d", "R_max", "A_max", "P_max"?, "b0", "jitter"?, "configs": [...]}
/// with each config {"kind": "gaussian_truncated" | "uniform" | "orthogonal_unit", ...}.
ScenarioSpec load_scenario_file(const std::filesystem::path& path, double rho);
ScenarioSpec parse_scenario_json(const std::string& text, double rho);

}  // namespace switchbid
