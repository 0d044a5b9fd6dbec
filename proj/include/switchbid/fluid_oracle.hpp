#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "switchbid/core_model.hpp"
#include "switchbid/lp_solver.hpp"

namespace switchbid {

/// A saddle point (w, p) of L(w, p) = <p, b> + sum_theta w_theta (g_theta(p) + beta_theta)
/// together with the certificates read off the LP.
struct SaddleSolution {
  Mixture weights;
  PriceVector price;
  /// L(w, p) evaluated at the returned pair.
  double value = 0.0;
  /// Configurations whose optimistic surplus attains the envelope max at p.
  std::vector<std::size_t> active_set;
  /// Tie-weighted consumption H(w, p) implied by the LP multipliers.
  Vec consumption;
  std::size_t lp_solves = 0;
};

enum class SaddleMethod {
  /// Full LP for small stores, column generation otherwise.
  automatic,
  /// One LP with a hinge variable per stored sample.
  full_lp,
  /// Same LP, solved through its dual with generated acceptance-set columns.
  column_generation,
};

struct SaddleOptions {
  SaddleMethod method = SaddleMethod::automatic;
  /// `automatic` switches to column generation above this many samples.
  std::size_t full_lp_sample_limit = 60;
  std::size_t max_generation_rounds = 5000;
  /// Relative stopping gap between the restricted and full envelope.
  double generation_tol = 1e-10;
  lp::SolverOptions lp;
};

/// Minimizes <b, p> + max_theta (g_hat_theta(p) + beta_theta) over p >= 0 and
/// recovers the maximizing mixture from the multipliers of the K envelope rows.
/// Requires every configuration to hold at least one sample and b > 0.
SaddleSolution solve_saddle(const SampleStore& stores, std::span<const double> bonuses,
                            std::span<const double> budget, const SaddleOptions& options = {});

/// Grid search of min_p <p, b> + max_theta (g_hat_theta(p) + beta_theta) over
/// [0, price_max]^d at spacing `grid_step`. Test oracle; refuses d > 2.
double brute_force_saddle(const SampleStore& stores, std::span<const double> bonuses,
                          std::span<const double> budget, double grid_step, double price_max);

/// L(w, p) on the empirical surpluses.
double saddle_objective(const SampleStore& stores, std::span<const double> bonuses,
                        std::span<const double> budget, const Mixture& w,
                        std::span<const double> price);

struct OracleEstimate {
  /// Per-period value.
  double value = 0.0;
  SaddleSolution saddle;
};

/// Switching-aware fluid value, per period, from `samples_per_config` stationary
/// draws per configuration.
OracleEstimate v_mix(const ScenarioSpec& scenario, std::span<const double> budget,
                     std::size_t samples_per_config, Rng& rng, const SaddleOptions& options = {});

/// Fixed-configuration offline value, in total units over `horizon` periods:
/// max over theta of the path-average offline LP optimum.
double v_fixed(const ScenarioSpec& scenario, std::span<const double> budget, std::size_t horizon,
               std::size_t num_paths, Rng& rng);

/// Offline LP for one path: max sum r_t x_t s.t. sum a_t x_t <= total_budget, x in [0,1]^T.
double offline_path_value(std::span<const RewardResourcePair> path,
                          std::span<const double> total_budget);

struct KktTolerances {
  double envelope = 1e-6;
  double weight = 1e-8;
  double feasibility = 1e-6;
  double complementarity = 1e-6;
  /// Band around r = <p, a> treated as a tie when bracketing consumption.
  double tie = 1e-9;

  static KktTolerances defaults(double reward_max, std::span<const double> budget,
                                double price_max);
};

struct KktReport {
  bool support_ok = false;
  bool feasible_ok = false;
  bool complementary_ok = false;
  bool all() const { return support_ok && feasible_ok && complementary_ok; }
};

/// Checks envelope support, feasibility and complementarity of (w, p).
/// Tie weights are not searched: the strict/weak consumption bracket
/// certifies that a valid tie weighting exists. `bonuses` may be empty
/// (treated as zero).
KktReport kkt_check(const Mixture& w, std::span<const double> price, const SampleStore& stores,
                    std::span<const double> budget, const KktTolerances& tol,
                    std::span<const double> bonuses = {});

}  // namespace switchbid
