#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace switchbid {

using Vec = std::vector<double>;
using Rng = std::mt19937_64;
using PriceVector = Vec;

/// One arrival: a reward scalar and its d-dimensional resource consumption.
struct RewardResourcePair {
  double reward = 0.0;
  Vec consumption;
};

/// Probability weights over the K configurations.
class Mixture {
 public:
  Mixture() = default;

  /// Validates nonnegativity and unit mass within `tol`, then rescales so the
  /// weights sum to one exactly. Throws std::invalid_argument otherwise.
  static Mixture from_weights(Vec weights, double tol = 1e-9);
  static Mixture one_hot(std::size_t num_configs, std::size_t index);
  static Mixture uniform(std::size_t num_configs);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const Vec& weights() const { return weights_; }

  /// Index of the largest weight; ties go to the lowest index.
  std::size_t argmax() const;

  /// Draws a configuration index with probability proportional to the weights.
  std::size_t sample(Rng& rng) const;

 private:
  explicit Mixture(Vec w) : weights_(std::move(w)) {}
  Vec weights_;
};

/// Append-only history of observed pairs for a single configuration, stored
/// flat so the hinge sums stay cache friendly.
class SampleSet {
 public:
  explicit SampleSet(std::size_t dim = 0) : dim_(dim) {}

  void push(const RewardResourcePair& pair);
  void push(double reward, std::span<const double> consumption);

  std::size_t size() const { return rewards_.size(); }
  bool empty() const { return rewards_.empty(); }
  std::size_t dim() const { return dim_; }

  double reward(std::size_t j) const { return rewards_[j]; }
  std::span<const double> consumption(std::size_t j) const {
    return {consumption_.data() + j * dim_, dim_};
  }
  RewardResourcePair pair(std::size_t j) const;

 private:
  std::size_t dim_;
  Vec rewards_;
  Vec consumption_;
};

/// Per-configuration sample sets. Every observed arrival goes in, admitted
/// or not.
class SampleStore {
 public:
  SampleStore() = default;
  SampleStore(std::size_t num_configs, std::size_t dim);

  void add(std::size_t config, const RewardResourcePair& pair);

  std::size_t num_configs() const { return sets_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t count(std::size_t config) const { return sets_.at(config).size(); }
  std::size_t total_count() const;

  const SampleSet& operator[](std::size_t config) const { return sets_[config]; }
  SampleSet& operator[](std::size_t config) { return sets_[config]; }

 private:
  std::size_t dim_ = 0;
  std::vector<SampleSet> sets_;
};

double dot(std::span<const double> x, std::span<const double> y);

/// Sample mean of (r - <p, a>)_+ with the N v 1 convention, so an empty set
/// yields 0.
double empirical_surplus(const SampleSet& samples, std::span<const double> price);

enum class Threshold { strict, weak };

/// Mean of a * 1{r > <p,a>} (strict) or a * 1{r >= <p,a>} (weak). A positive
/// `tie_tol` widens the tie band: strict requires r - <p,a> > tie_tol, weak
/// accepts r - <p,a> >= -tie_tol. Throws on an empty set.
Vec empirical_consumption(const SampleSet& samples, std::span<const double> price,
                          Threshold mode, double tie_tol = 0.0);

/// Remaining and initial budget plus the per-period and safe per-period rates.
struct BudgetState {
  Vec remaining;
  Vec total;
  Vec per_period;
  Vec safe_per_period;
  double slack = 0.0;

  /// B_rem = B, b = B / T, b_safe = (1 - eps) b with eps = sqrt(log T / T).
  static BudgetState make(Vec total_budget, std::size_t horizon);
};

/// eps = sqrt(log T / T); zero at T = 1.
double safe_budget_slack(std::size_t horizon);

enum class Decision { reject, accept };

/// Bid-price admission with hard feasibility: accept iff a <= B_rem
/// componentwise and r > <p,a>. On accept B_rem is decremented by a.
/// `rule = Threshold::weak` swaps the price test to r >= <p,a>; only fault
/// injection in the validation suite uses it.
Decision admit(const RewardResourcePair& pair, std::span<const double> price,
               BudgetState& budget, Threshold rule = Threshold::strict);

/// Hard-feasibility check a <= B_rem, shared by the price-free baseline.
bool fits(std::span<const double> consumption, std::span<const double> remaining);

/// Source of configuration-conditional arrivals.
class ArrivalModel {
 public:
  virtual ~ArrivalModel() = default;

  /// Arrival at 0-based round `round` when configuration `config` is selected.
  virtual RewardResourcePair draw(std::size_t config, std::size_t round, Rng& rng) const = 0;

  /// Draw from the stationary law that oracle Monte Carlo estimates against.
  /// Defaults to `draw` for i.i.d. models.
  virtual RewardResourcePair draw_stationary(std::size_t config, Rng& rng) const {
    return draw(config, 0, rng);
  }

  /// Longest horizon the model can serve; finite for trace replay.
  virtual std::size_t max_horizon() const { return std::numeric_limits<std::size_t>::max(); }
};

/// A scenario: K configurations over d resources with bound constants and a
/// per-period budget b = rho * b0.
struct ScenarioSpec {
  std::string name;
  std::size_t num_configs = 0;
  std::size_t dim = 0;
  double reward_max = 0.0;
  double consumption_max = 0.0;
  double price_max = 0.0;
  Vec baseline_budget;
  double rho = 1.0;
  Vec budget;
  std::shared_ptr<const ArrivalModel> arrivals;

  /// B = T * b.
  Vec total_budget(std::size_t horizon) const;

  /// Throws std::invalid_argument on inconsistent sizes or nonpositive b0.
  void validate() const;
};

/// 2 * R_max / b_min; infinite when some coordinate of b is zero.
double default_price_max(double reward_max, std::span<const double> budget);

}  // namespace switchbid
