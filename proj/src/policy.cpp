#include "switchbid/policy.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

namespace switchbid {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::spucb: return "spucb";
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::random: return "random";
    case PolicyKind::oracle: return "oracle";
    case PolicyKind::onehot: return "onehot";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(const std::string& name) {
  for (auto kind : all_policy_kinds()) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown policy '" + name +
                              "'; valid policies: spucb, greedy, random, oracle, onehot");
}

std::vector<PolicyKind> all_policy_kinds() {
  return {PolicyKind::spucb, PolicyKind::greedy, PolicyKind::random, PolicyKind::oracle, PolicyKind::onehot};
}

void PolicyParams::validate() const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  if (delta && !(*delta > 0.0 && *delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(c_g > 0.0)) throw std::invalid_argument("c_g must be positive");
}

RadiusTerms radius_terms(const PolicyParams& params, const ScenarioSpec& scenario, std::size_t horizon) {
  RadiusTerms t;
  t.alpha = params.alpha;
  t.c_g = params.c_g;
  t.c_0 = params.c_0;
  t.horizon = static_cast<double>(horizon);
  t.delta = params.delta.value_or(1.0 / (t.horizon * t.horizon));
  t.reward_max = scenario.reward_max;
  t.consumption_max = scenario.consumption_max;
  t.price_max = scenario.price_max;
  t.dim = scenario.dim;
  t.num_configs = scenario.num_configs;
  return t;
}

double confidence_radius(double count, const RadiusTerms& t) {
  if (t.alpha == 0.0) return 0.0;
  const double d = static_cast<double>(t.dim);
  const double cover = t.c_0 * d * t.price_max * t.consumption_max * t.horizon / t.reward_max;
  const double union_bound = static_cast<double>(t.num_configs) * t.horizon / t.delta;
  if (!(cover > 0.0) || !(union_bound > 0.0) || !std::isfinite(cover)) {
    throw std::invalid_argument("confidence radius: nonpositive log argument");
  }
  const double numerator = d * std::log(cover) + std::log(union_bound);
  if (numerator < 0.0) throw std::invalid_argument("confidence radius: negative numerator");
  return t.alpha * t.c_g * t.reward_max * std::sqrt(numerator / std::max(count, 1.0));
}

namespace {

bool positive(std::span<const double> v) {
  for (double x : v) {
    if (!(x > 0.0)) return false;
  }
  return true;
}

void log_round(RunRecord& rec, const PolicyParams& params, std::size_t config, const RewardResourcePair& pair,
               bool accepted, std::span<const double> price, const Mixture* w) {
  if (!params.record_log) return;
  RoundLog entry{config, pair.reward, pair.consumption, accepted, Vec(price.begin(), price.end()), {}};
  if (w) entry.weights = w->weights();
  rec.log.push_back(std::move(entry));
}

void accept(RunRecord& rec, const RewardResourcePair& pair) {
  rec.total_reward += pair.reward;
  ++rec.accepted;
}

// SP-UCB-OLP and the variants built on its machinery. greedy drops the
// bonus. onehot commits to the argmax vertex of its first optimistic mixture
// and from then on prices that configuration alone.
RunRecord run_optimistic(PolicyKind kind, const ScenarioSpec& scenario, std::size_t horizon,
                         const PolicyParams& params, Rng& rng) {
  params.validate();
  const std::size_t K = scenario.num_configs;
  if (horizon <= K) throw std::invalid_argument("horizon must exceed the number of configurations");
  if (horizon > scenario.arrivals->max_horizon()) {
    throw std::invalid_argument("horizon exceeds what the arrival model can serve");
  }

  PolicyParams effective = params;
  if (kind == PolicyKind::greedy) effective.alpha = 0.0;
  const RadiusTerms terms = radius_terms(effective, scenario, horizon);

  RunRecord rec;
  rec.kind = kind;
  rec.budget = BudgetState::make(scenario.total_budget(horizon), horizon);
  if (params.record_log) rec.log.reserve(horizon);
  SampleStore store(K, scenario.dim);

  for (std::size_t t = 0; t < K; ++t) {
    auto pair = scenario.arrivals->draw(t, t, rng);
    store.add(t, pair);
    log_round(rec, params, t, pair, false, {}, nullptr);
  }

  const bool solvable = positive(rec.budget.safe_per_period);
  Mixture w = Mixture::uniform(K);
  Vec price(scenario.dim, 0.0);
  std::vector<std::size_t> counts_at_solve;
  Vec bonuses(K);
  // onehot only: the configuration chosen at the first solve, and its samples.
  std::optional<std::size_t> committed;
  SampleStore committed_store;

  for (std::size_t t = K; t < horizon; ++t) {
    bool resolve = counts_at_solve.empty() || effective.schedule == ResolveSchedule::every_round;
    for (std::size_t k = 0; !resolve && k < K; ++k) resolve = store.count(k) >= 2 * counts_at_solve[k];
    if (resolve && solvable) {
      for (std::size_t k = 0; k < K; ++k) {
        bonuses[k] = confidence_radius(static_cast<double>(store.count(k)), terms);
      }
      try {
        if (kind == PolicyKind::onehot && committed) {
          // Committed: price the chosen configuration on its own samples.
          const Vec own{bonuses[*committed]};
          price = solve_saddle(committed_store, own, rec.budget.safe_per_period, effective.saddle).price;
        } else {
          auto sol = solve_saddle(store, bonuses, rec.budget.safe_per_period, effective.saddle);
          w = sol.weights;
          price = std::move(sol.price);
          if (kind == PolicyKind::onehot) {
            committed = w.argmax();
            w = Mixture::one_hot(K, *committed);
            committed_store = SampleStore(1, scenario.dim);
            for (std::size_t j = 0; j < store.count(*committed); ++j) {
              committed_store.add(0, store[*committed].pair(j));
            }
            const Vec own{bonuses[*committed]};
            price = solve_saddle(committed_store, own, rec.budget.safe_per_period, effective.saddle).price;
            ++rec.solve_count;
          }
        }
      } catch (const std::exception& e) {
        throw std::runtime_error(fmt::format("{} on {}: saddle solve failed at round {} with {} samples: {}",
                                             to_string(kind), scenario.name, t + 1, store.total_count(),
                                             e.what()));
      }
      ++rec.solve_count;
      counts_at_solve.resize(K);
      for (std::size_t k = 0; k < K; ++k) counts_at_solve[k] = store.count(k);
    } else if (resolve) {
      // Zero budget: nothing to price, keep the uniform mixture at p = 0.
      counts_at_solve.resize(K);
      for (std::size_t k = 0; k < K; ++k) counts_at_solve[k] = store.count(k);
    }

    const std::size_t theta = w.sample(rng);
    auto pair = scenario.arrivals->draw(theta, t, rng);
    store.add(theta, pair);
    if (committed) committed_store.add(0, pair);
    const bool ok = admit(pair, price, rec.budget, params.admission) == Decision::accept;
    if (ok) accept(rec, pair);
    log_round(rec, params, theta, pair, ok, price, &w);
  }
  return rec;
}

RunRecord run_random(const ScenarioSpec& scenario, std::size_t horizon, const PolicyParams& params, Rng& rng) {
  RunRecord rec;
  rec.kind = PolicyKind::random;
  rec.budget = BudgetState::make(scenario.total_budget(horizon), horizon);
  if (params.record_log) rec.log.reserve(horizon);
  std::uniform_int_distribution<std::size_t> pick(0, scenario.num_configs - 1);
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t theta = pick(rng);
    auto pair = scenario.arrivals->draw(theta, t, rng);
    const bool ok = fits(pair.consumption, rec.budget.remaining);
    if (ok) {
      for (std::size_t i = 0; i < pair.consumption.size(); ++i) {
        rec.budget.remaining[i] -= pair.consumption[i];
      }
      accept(rec, pair);
    }
    log_round(rec, params, theta, pair, ok, {}, nullptr);
  }
  return rec;
}

RunRecord run_oracle(const ScenarioSpec& scenario, std::size_t horizon, const PolicyParams& params, Rng& rng,
                     const SaddleSolution& saddle) {
  if (saddle.weights.size() != scenario.num_configs || saddle.price.size() != scenario.dim) {
    throw std::invalid_argument("oracle saddle does not match the scenario");
  }
  RunRecord rec;
  rec.kind = PolicyKind::oracle;
  rec.budget = BudgetState::make(scenario.total_budget(horizon), horizon);
  if (params.record_log) rec.log.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t theta = saddle.weights.sample(rng);
    auto pair = scenario.arrivals->draw(theta, t, rng);
    const bool ok = admit(pair, saddle.price, rec.budget, params.admission) == Decision::accept;
    if (ok) accept(rec, pair);
    log_round(rec, params, theta, pair, ok, saddle.price, &saddle.weights);
  }
  return rec;
}

}  // namespace

RunRecord run_spucb(const ScenarioSpec& scenario, std::size_t horizon, const PolicyParams& params, Rng& rng) {
  return run_optimistic(PolicyKind::spucb, scenario, horizon, params, rng);
}

RunRecord run_baseline(PolicyKind kind, const ScenarioSpec& scenario, std::size_t horizon,
                       const PolicyParams& params, Rng& rng, const SaddleSolution* oracle_saddle) {
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  switch (kind) {
    case PolicyKind::greedy:
    case PolicyKind::onehot:
      return run_optimistic(kind, scenario, horizon, params, rng);
    case PolicyKind::random:
      return run_random(scenario, horizon, params, rng);
    case PolicyKind::oracle:
      if (!oracle_saddle) throw std::invalid_argument("oracle baseline needs a precomputed saddle solution");
      return run_oracle(scenario, horizon, params, rng, *oracle_saddle);
    case PolicyKind::spucb:
      break;
  }
  throw std::invalid_argument("run_baseline: spucb is not a baseline");
}

RunRecord run_policy(PolicyKind kind, const ScenarioSpec& scenario, std::size_t horizon,
                     const PolicyParams& params, Rng& rng, const SaddleSolution* oracle_saddle) {
  if (kind == PolicyKind::spucb) return run_spucb(scenario, horizon, params, rng);
  return run_baseline(kind, scenario, horizon, params, rng, oracle_saddle);
}

double regret_mix(const RunRecord& record, double v_mix_per_period, std::size_t horizon) {
  return static_cast<double>(horizon) * v_mix_per_period - record.total_reward;
}

double mix_ratio(double total_reward, double v_mix_per_period, std::size_t horizon) {
  if (!(v_mix_per_period > 0.0) || horizon == 0) {
    throw std::invalid_argument("competitive ratio needs a positive mixed benchmark");
  }
  return total_reward / (static_cast<double>(horizon) * v_mix_per_period);
}

double star_ratio(double total_reward, double v_fixed_total) {
  if (!(v_fixed_total > 0.0)) throw std::invalid_argument("competitive ratio needs a positive fixed benchmark");
  return total_reward / v_fixed_total;
}

CompetitiveRatios competitive_ratios(const RunRecord& record, double v_mix_per_period, double v_fixed_total,
                                     std::size_t horizon) {
  return {mix_ratio(record.total_reward, v_mix_per_period, horizon), star_ratio(record.total_reward, v_fixed_total)};
}

}  // namespace switchbid
