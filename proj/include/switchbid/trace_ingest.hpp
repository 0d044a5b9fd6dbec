#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "switchbid/core_model.hpp"

namespace switchbid {

/// One batch task: normalized CPU and memory requests and its position in
/// the parsed file.
struct TraceArrival {
  double cpu = 0.0;
  double mem = 0.0;
  std::int64_t start_time = 0;
  std::size_t order_index = 0;
};

struct TraceParseResult {
  std::vector<TraceArrival> arrivals;
  /// Rows with the wrong column count or an unreadable start_time.
  std::size_t malformed = 0;
  /// Well-formed rows with a missing or nonpositive plan_cpu or plan_mem.
  std::size_t dropped = 0;
};

/// Reads a headerless batch_task CSV (task_name, instance_num, job_name,
/// task_type, status, start_time, end_time, plan_cpu, plan_mem), drops
/// invalid rows, stable-sorts by start_time and keeps the first `limit`
/// arrivals with cpu = plan_cpu / 100 and mem = plan_mem / 100.
/// Throws std::runtime_error when the file is missing or holds fewer than
/// `limit` valid rows.
TraceParseResult parse_trace(const std::filesystem::path& path, std::size_t limit);

/// Reward coefficients (c1, c2) per regime.
struct RegimeTable {
  std::vector<std::array<double, 2>> coefficients{{2.0, 0.5}, {0.5, 2.0}, {1.2, 1.2}};
  std::size_t size() const { return coefficients.size(); }
};

/// max(0, c1 cpu + c2 mem + eps) with eps ~ N(0, sigma^2). Throws
/// std::out_of_range for an unknown regime.
double construct_reward(const TraceArrival& arrival, std::size_t regime, const RegimeTable& regimes,
                        double sigma, Rng& rng);

/// Replays the arrivals in order: round t yields arrival t with the reward
/// of the selected regime. Stationary draws resample the window uniformly.
class TraceArrivals : public ArrivalModel {
 public:
  TraceArrivals(std::shared_ptr<const std::vector<TraceArrival>> arrivals, RegimeTable regimes, double sigma,
                double reward_max);

  RewardResourcePair draw(std::size_t config, std::size_t round, Rng& rng) const override;
  RewardResourcePair draw_stationary(std::size_t config, Rng& rng) const override;
  std::size_t max_horizon() const override { return arrivals_->size(); }

 private:
  RewardResourcePair make(const TraceArrival& a, std::size_t config, Rng& rng) const;

  std::shared_ptr<const std::vector<TraceArrival>> arrivals_;
  RegimeTable regimes_;
  double sigma_;
  double reward_max_;
};

/// K = regimes, d = 2 scenario over the arrival window with per-period
/// budget rho * 0.5 * mean [cpu, mem], R_max = 2 max cpu + 2 max mem + 6 sigma
/// and A_max the largest observed coordinate.
ScenarioSpec trace_scenario(std::vector<TraceArrival> arrivals, const RegimeTable& regimes, double sigma,
                            double rho);

}  // namespace switchbid
