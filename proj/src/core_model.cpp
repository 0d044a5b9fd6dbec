#include "switchbid/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace switchbid {

Mixture Mixture::from_weights(Vec weights, double tol) {
  if (weights.empty()) throw std::invalid_argument("mixture: no weights");
  double mass = 0.0;
  for (double w : weights) {
    if (!(w >= -tol)) throw std::invalid_argument("mixture: negative weight " + std::to_string(w));
    mass += w;
  }
  if (std::abs(mass - 1.0) > tol) {
    throw std::invalid_argument("mixture: weights sum to " + std::to_string(mass));
  }
  mass = 0.0;
  for (double& w : weights) {
    w = std::max(w, 0.0);
    mass += w;
  }
  for (double& w : weights) w /= mass;
  return Mixture(std::move(weights));
}

Mixture Mixture::one_hot(std::size_t num_configs, std::size_t index) {
  Vec w(num_configs, 0.0);
  w.at(index) = 1.0;
  return Mixture(std::move(w));
}

Mixture Mixture::uniform(std::size_t num_configs) {
  if (num_configs == 0) throw std::invalid_argument("mixture: no configurations");
  return Mixture(Vec(num_configs, 1.0 / static_cast<double>(num_configs)));
}

std::size_t Mixture::argmax() const {
  return static_cast<std::size_t>(
      std::distance(weights_.begin(), std::max_element(weights_.begin(), weights_.end())));
}

std::size_t Mixture::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] <= 0.0) continue;
    acc += weights_[i];
    last_positive = i;
    if (u < acc) return i;
  }
  // u landed in the rounding gap above the cumulative mass.
  return last_positive;
}

void SampleSet::push(const RewardResourcePair& pair) { push(pair.reward, pair.consumption); }

void SampleSet::push(double reward, std::span<const double> consumption) {
  if (consumption.size() != dim_) {
    throw std::invalid_argument("sample set: consumption has dimension " +
                                std::to_string(consumption.size()) + ", expected " +
                                std::to_string(dim_));
  }
  rewards_.push_back(reward);
  consumption_.insert(consumption_.end(), consumption.begin(), consumption.end());
}

RewardResourcePair SampleSet::pair(std::size_t j) const {
  auto a = consumption(j);
  return {rewards_[j], Vec(a.begin(), a.end())};
}

SampleStore::SampleStore(std::size_t num_configs, std::size_t dim)
    : dim_(dim), sets_(num_configs, SampleSet(dim)) {}

void SampleStore::add(std::size_t config, const RewardResourcePair& pair) {
  sets_.at(config).push(pair);
}

std::size_t SampleStore::total_count() const {
  std::size_t n = 0;
  for (const auto& s : sets_) n += s.size();
  return n;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

namespace {

void check_dim(const SampleSet& samples, std::span<const double> price) {
  if (price.size() != samples.dim()) {
    throw std::invalid_argument("price has dimension " + std::to_string(price.size()) +
                                ", samples have " + std::to_string(samples.dim()));
  }
}

}  // namespace

double empirical_surplus(const SampleSet& samples, std::span<const double> price) {
  check_dim(samples, price);
  double total = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    total += std::max(0.0, samples.reward(j) - dot(price, samples.consumption(j)));
  }
  return total / static_cast<double>(std::max<std::size_t>(samples.size(), 1));
}

Vec empirical_consumption(const SampleSet& samples, std::span<const double> price,
                          Threshold mode, double tie_tol) {
  check_dim(samples, price);
  if (samples.empty()) throw std::invalid_argument("empirical consumption of an empty sample set");
  Vec h(samples.dim(), 0.0);
  for (std::size_t j = 0; j < samples.size(); ++j) {
    auto a = samples.consumption(j);
    const double margin = samples.reward(j) - dot(price, a);
    const bool pass = mode == Threshold::strict ? margin > tie_tol : margin >= -tie_tol;
    if (!pass) continue;
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += a[i];
  }
  for (double& x : h) x /= static_cast<double>(samples.size());
  return h;
}

double safe_budget_slack(std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  const double t = static_cast<double>(horizon);
  return std::sqrt(std::log(t) / t);
}

BudgetState BudgetState::make(Vec total_budget, std::size_t horizon) {
  for (double b : total_budget) {
    if (!(b >= 0.0)) throw std::invalid_argument("budget must be nonnegative");
  }
  BudgetState s;
  s.slack = safe_budget_slack(horizon);
  s.total = std::move(total_budget);
  s.remaining = s.total;
  s.per_period.resize(s.total.size());
  s.safe_per_period.resize(s.total.size());
  for (std::size_t i = 0; i < s.total.size(); ++i) {
    s.per_period[i] = s.total[i] / static_cast<double>(horizon);
    s.safe_per_period[i] = (1.0 - s.slack) * s.per_period[i];
  }
  return s;
}

bool fits(std::span<const double> consumption, std::span<const double> remaining) {
  for (std::size_t i = 0; i < consumption.size(); ++i) {
    if (consumption[i] > remaining[i]) return false;
  }
  return true;
}

Decision admit(const RewardResourcePair& pair, std::span<const double> price,
               BudgetState& budget, Threshold rule) {
  if (!fits(pair.consumption, budget.remaining)) return Decision::reject;
  const double cost = dot(price, pair.consumption);
  const bool priced_in = rule == Threshold::strict ? pair.reward > cost : pair.reward >= cost;
  if (!priced_in) return Decision::reject;
  for (std::size_t i = 0; i < budget.remaining.size(); ++i) {
    budget.remaining[i] -= pair.consumption[i];
  }
  return Decision::accept;
}

Vec ScenarioSpec::total_budget(std::size_t horizon) const {
  Vec total(budget);
  for (double& x : total) x *= static_cast<double>(horizon);
  return total;
}

void ScenarioSpec::validate() const {
  if (num_configs == 0 || dim == 0) throw std::invalid_argument(name + ": empty scenario");
  if (baseline_budget.size() != dim || budget.size() != dim) {
    throw std::invalid_argument(name + ": budget dimension mismatch");
  }
  for (double b : baseline_budget) {
    if (!(b > 0.0)) throw std::invalid_argument(name + ": baseline budget must be positive");
  }
  if (!(rho >= 0.0)) throw std::invalid_argument(name + ": rho must be nonnegative");
  if (!(reward_max > 0.0) || !(consumption_max > 0.0)) {
    throw std::invalid_argument(name + ": bounds must be positive");
  }
  if (!arrivals) throw std::invalid_argument(name + ": no arrival model");
}

double default_price_max(double reward_max, std::span<const double> budget) {
  double b_min = std::numeric_limits<double>::infinity();
  for (double b : budget) b_min = std::min(b_min, b);
  if (!(b_min > 0.0)) return std::numeric_limits<double>::infinity();
  return 2.0 * reward_max / b_min;
}

}  // namespace switchbid
