#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "switchbid/core_model.hpp"
#include "switchbid/fluid_oracle.hpp"

namespace switchbid {

enum class PolicyKind { spucb, greedy, random, oracle, onehot };

std::string to_string(PolicyKind kind);
/// Accepts spucb, greedy, random, oracle, onehot. Throws std::invalid_argument.
PolicyKind parse_policy_kind(const std::string& name);
std::vector<PolicyKind> all_policy_kinds();

enum class ResolveSchedule { every_round, doubling };

struct PolicyParams {
  double alpha = 0.1;
  /// Confidence level; defaults to T^-2 when unset.
  std::optional<double> delta;
  double c_g = 0.0707;
  double c_0 = 1.0;
  ResolveSchedule schedule = ResolveSchedule::doubling;
  /// Keep the per-round log. Totals and the final budget are always kept.
  bool record_log = true;
  /// Price test used at admission. Only the validation fault hook sets weak.
  Threshold admission = Threshold::strict;
  SaddleOptions saddle;

  void validate() const;
};

/// Constants entering the confidence radius. `horizon` is real-valued so the
/// formula can be evaluated away from integer T.
struct RadiusTerms {
  double alpha = 0.0;
  double c_g = 0.0707;
  double c_0 = 1.0;
  double delta = 0.0;
  double reward_max = 1.0;
  double consumption_max = 1.0;
  double price_max = 1.0;
  std::size_t dim = 1;
  std::size_t num_configs = 1;
  double horizon = 1.0;
};

RadiusTerms radius_terms(const PolicyParams& params, const ScenarioSpec& scenario, std::size_t horizon);

/// alpha c_g R_max sqrt((d log(c_0 d P_max A_max T / R_max) + log(K T / delta)) / (N v 1)).
/// Throws std::invalid_argument when a log argument is nonpositive or the
/// numerator is negative.
double confidence_radius(double count, const RadiusTerms& terms);

struct RoundLog {
  std::size_t config = 0;
  double reward = 0.0;
  Vec consumption;
  bool accepted = false;
  /// Price and mixture in force this round; empty during warm start.
  Vec price;
  Vec weights;
};

struct RunRecord {
  PolicyKind kind = PolicyKind::spucb;
  double total_reward = 0.0;
  std::size_t accepted = 0;
  std::size_t solve_count = 0;
  BudgetState budget;
  std::vector<RoundLog> log;
};

/// SP-UCB-OLP: K round-robin observation rounds, then optimistic saddle
/// solves at b_safe on the resolve schedule, mixture sampling and bid-price
/// admission. The budget is B = T * scenario.budget. Requires T > K.
RunRecord run_spucb(const ScenarioSpec& scenario, std::size_t horizon, const PolicyParams& params, Rng& rng);

/// greedy: run_spucb with alpha = 0. random: uniform configuration, accept
/// whenever the arrival fits. oracle: the fixed (w, p) of `oracle_saddle`
/// every round. onehot: the first optimistic solve picks the argmax vertex,
/// which is then kept for the rest of the run and priced on its own samples.
/// `oracle_saddle` is required for the oracle and ignored otherwise.
RunRecord run_baseline(PolicyKind kind, const ScenarioSpec& scenario, std::size_t horizon,
                       const PolicyParams& params, Rng& rng,
                       const SaddleSolution* oracle_saddle = nullptr);

/// Dispatches to run_spucb or run_baseline.
RunRecord run_policy(PolicyKind kind, const ScenarioSpec& scenario, std::size_t horizon,
                     const PolicyParams& params, Rng& rng, const SaddleSolution* oracle_saddle = nullptr);

/// T * v_mix - R_T for one run.
double regret_mix(const RunRecord& record, double v_mix_per_period, std::size_t horizon);

struct CompetitiveRatios {
  double mix = 0.0;
  double star = 0.0;
};

/// R_T / (T v_mix). Throws std::invalid_argument unless v_mix > 0.
double mix_ratio(double total_reward, double v_mix_per_period, std::size_t horizon);
/// R_T / V*. Throws std::invalid_argument unless v_fixed_total > 0.
double star_ratio(double total_reward, double v_fixed_total);

CompetitiveRatios competitive_ratios(const RunRecord& record, double v_mix_per_period,
                                     double v_fixed_total, std::size_t horizon);

}  // namespace switchbid
