#include "switchbid/fluid_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace switchbid {

namespace {

void check_saddle_inputs(const SampleStore& stores, std::span<const double> bonuses,
                         std::span<const double> budget) {
  if (stores.num_configs() == 0) throw std::invalid_argument("solve_saddle: no configurations");
  if (bonuses.size() != stores.num_configs()) {
    throw std::invalid_argument("solve_saddle: expected one bonus per configuration");
  }
  if (budget.size() != stores.dim()) throw std::invalid_argument("solve_saddle: budget dimension mismatch");
  for (std::size_t k = 0; k < stores.num_configs(); ++k) {
    if (stores.count(k) == 0) {
      throw std::invalid_argument("solve_saddle: configuration " + std::to_string(k) +
                                  " has no samples");
    }
    if (!std::isfinite(bonuses[k]) || bonuses[k] < 0.0) {
      throw std::invalid_argument("solve_saddle: bonuses must be finite and nonnegative");
    }
  }
  for (double b : budget) {
    if (!(b > 0.0)) throw std::invalid_argument("solve_saddle: budget must be positive");
  }
}

// Weights recovered from LP multipliers: clip tiny negatives, renormalize,
// refuse anything that drifted further than 1e-6 off the simplex.
Mixture normalize_duals(Vec w) {
  double mass = 0.0;
  for (double& x : w) {
    if (x < -1e-6) throw std::runtime_error("solve_saddle: negative envelope multiplier " + std::to_string(x));
    x = std::max(0.0, x);
    mass += x;
  }
  if (std::abs(mass - 1.0) > 1e-6) {
    throw std::runtime_error("solve_saddle: envelope multipliers sum to " + std::to_string(mass));
  }
  for (double& x : w) x /= mass;
  return Mixture::from_weights(std::move(w));
}

void finish(SaddleSolution& sol, const SampleStore& stores, std::span<const double> bonuses,
            std::span<const double> budget) {
  for (double& p : sol.price) p = std::max(0.0, p);
  const std::size_t K = stores.num_configs();
  Vec envelope(K);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    envelope[k] = empirical_surplus(stores[k], sol.price) + bonuses[k];
    best = std::max(best, envelope[k]);
  }
  double reward_max = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < stores[k].size(); ++j) reward_max = std::max(reward_max, stores[k].reward(j));
  }
  const double tol_env = 1e-6 * (1.0 + reward_max);
  sol.active_set.clear();
  for (std::size_t k = 0; k < K; ++k) {
    if (envelope[k] >= best - tol_env) sol.active_set.push_back(k);
  }
  sol.value = saddle_objective(stores, bonuses, budget, sol.weights, sol.price);
}

SaddleSolution solve_full_lp(const SampleStore& stores, std::span<const double> bonuses,
                             std::span<const double> budget, const SaddleOptions& opt) {
  const std::size_t K = stores.num_configs();
  const std::size_t d = stores.dim();
  const std::size_t N = stores.total_count();
  const std::size_t z_col = d;
  const std::size_t y_begin = d + 1;

  lp::LinearProgram prog(d + 1 + N);
  for (std::size_t i = 0; i < d; ++i) prog.objective[i] = budget[i];
  prog.objective[z_col] = 1.0;
  // z >= max beta >= 0 at any feasible point, so a bound below zero is never
  // active and the envelope multipliers sum to one exactly.
  prog.lower[z_col] = -1.0;

  std::vector<std::pair<std::size_t, double>> entries;
  std::size_t y = y_begin;
  for (std::size_t k = 0; k < K; ++k) {
    entries.clear();
    entries.emplace_back(z_col, 1.0);
    const double inv_n = 1.0 / static_cast<double>(stores.count(k));
    for (std::size_t j = 0; j < stores.count(k); ++j) entries.emplace_back(y + j, -inv_n);
    prog.add_sparse_row(entries, lp::Sense::greater_equal, bonuses[k]);
    y += stores.count(k);
  }
  y = y_begin;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < stores.count(k); ++j) {
      entries.clear();
      entries.emplace_back(y + j, 1.0);
      auto a = stores[k].consumption(j);
      for (std::size_t i = 0; i < d; ++i) entries.emplace_back(i, a[i]);
      prog.add_sparse_row(entries, lp::Sense::greater_equal, stores[k].reward(j));
    }
    y += stores.count(k);
  }

  auto lp_sol = lp::solve(prog, opt.lp);
  if (lp_sol.status != lp::Status::optimal) {
    throw std::runtime_error(std::string("solve_saddle: internal error, LP reported ") +
                             lp::to_string(lp_sol.status));
  }

  SaddleSolution sol;
  sol.lp_solves = 1;
  sol.price.assign(lp_sol.x.begin(), lp_sol.x.begin() + static_cast<std::ptrdiff_t>(d));
  sol.weights = normalize_duals(Vec(lp_sol.duals.begin(), lp_sol.duals.begin() + static_cast<std::ptrdiff_t>(K)));
  sol.consumption.assign(d, 0.0);
  std::size_t row = K;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < stores.count(k); ++j, ++row) {
      const double eta = std::max(0.0, lp_sol.duals[row]);
      auto a = stores[k].consumption(j);
      for (std::size_t i = 0; i < d; ++i) sol.consumption[i] += eta * a[i];
    }
  }
  finish(sol, stores, bonuses, budget);
  return sol;
}

// One generated column: configuration `config` accepting exactly the samples
// in some set S, i.e. the piece beta + (1/N) sum_S (r - <p, a>) of g_hat + beta.
struct AcceptanceColumn {
  std::size_t config;
  double value;   // beta + (1/N) sum_S r
  Vec usage;      // (1/N) sum_S a
};

std::uint64_t sample_key(std::size_t config, std::size_t j) {
  std::uint64_t x = (static_cast<std::uint64_t>(config) << 40) ^ static_cast<std::uint64_t>(j);
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SaddleSolution solve_column_generation(const SampleStore& stores, std::span<const double> bonuses,
                                       std::span<const double> budget, const SaddleOptions& opt) {
  const std::size_t K = stores.num_configs();
  const std::size_t d = stores.dim();

  std::vector<AcceptanceColumn> columns;
  std::vector<std::unordered_set<std::uint64_t>> seen(K);

  // Column for the set of samples with positive margin at `price`; returns
  // false when that column is already present.
  auto add_column = [&](std::size_t k, std::span<const double> price) {
    const auto& set = stores[k];
    const double inv_n = 1.0 / static_cast<double>(set.size());
    AcceptanceColumn col{k, 0.0, Vec(d, 0.0)};
    std::uint64_t key = 0;
    for (std::size_t j = 0; j < set.size(); ++j) {
      auto a = set.consumption(j);
      if (set.reward(j) - dot(price, a) <= 0.0) continue;
      col.value += set.reward(j);
      for (std::size_t i = 0; i < d; ++i) col.usage[i] += a[i];
      key ^= sample_key(k, j);
    }
    if (!seen[k].insert(key).second) return false;
    col.value = bonuses[k] + col.value * inv_n;
    for (double& u : col.usage) u *= inv_n;
    columns.push_back(std::move(col));
    return true;
  };

  // Empty acceptance sets keep the restricted problem feasible; the
  // accept-everything sets are the pieces active at p = 0.
  for (std::size_t k = 0; k < K; ++k) {
    columns.push_back({k, bonuses[k], Vec(d, 0.0)});
    seen[k].insert(0);
    add_column(k, Vec(d, 0.0));
  }

  SaddleSolution sol;
  Vec price(d, 0.0);
  for (std::size_t round = 0;; ++round) {
    if (round >= opt.max_generation_rounds) {
      throw lp::SolverStalled("saddle column generation did not converge in " +
                              std::to_string(opt.max_generation_rounds) + " rounds");
    }
    // Restricted dual: max sum lambda_c value_c  s.t. sum lambda = 1,
    // sum lambda_c usage_c <= b, lambda >= 0.
    lp::LinearProgram master(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) master.objective[c] = -columns[c].value;
    master.add_row(Vec(columns.size(), 1.0), lp::Sense::equal, 1.0);
    Vec row(columns.size());
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t c = 0; c < columns.size(); ++c) row[c] = columns[c].usage[i];
      master.add_row(row, lp::Sense::less_equal, budget[i]);
    }
    auto ms = lp::solve(master, opt.lp);
    ++sol.lp_solves;
    if (ms.status != lp::Status::optimal) {
      throw std::runtime_error(std::string("solve_saddle: internal error, master LP reported ") +
                               lp::to_string(ms.status));
    }
    const double z = -ms.duals[0];
    for (std::size_t i = 0; i < d; ++i) price[i] = std::max(0.0, -ms.duals[1 + i]);

    bool added = false;
    double worst_gap = 0.0;
    const double tol = opt.generation_tol * (1.0 + std::abs(z));
    for (std::size_t k = 0; k < K; ++k) {
      const double gap = empirical_surplus(stores[k], price) + bonuses[k] - z;
      worst_gap = std::max(worst_gap, gap);
      if (gap > tol && add_column(k, price)) added = true;
    }
    if (!added) {
      if (worst_gap > 1e-7 * (1.0 + std::abs(z))) {
        throw lp::SolverStalled("saddle column generation stalled with envelope gap " +
                                std::to_string(worst_gap));
      }
      Vec w(K, 0.0);
      sol.consumption.assign(d, 0.0);
      for (std::size_t c = 0; c < columns.size(); ++c) {
        const double lam = ms.x[c];
        w[columns[c].config] += lam;
        for (std::size_t i = 0; i < d; ++i) sol.consumption[i] += lam * columns[c].usage[i];
      }
      sol.weights = normalize_duals(std::move(w));
      sol.price = price;
      break;
    }
  }
  finish(sol, stores, bonuses, budget);
  return sol;
}

}  // namespace

double saddle_objective(const SampleStore& stores, std::span<const double> bonuses,
                        std::span<const double> budget, const Mixture& w,
                        std::span<const double> price) {
  double value = dot(price, budget);
  for (std::size_t k = 0; k < stores.num_configs(); ++k) {
    if (w[k] == 0.0) continue;
    const double bonus = bonuses.empty() ? 0.0 : bonuses[k];
    value += w[k] * (empirical_surplus(stores[k], price) + bonus);
  }
  return value;
}

SaddleSolution solve_saddle(const SampleStore& stores, std::span<const double> bonuses,
                            std::span<const double> budget, const SaddleOptions& options) {
  check_saddle_inputs(stores, bonuses, budget);
  SaddleMethod method = options.method;
  if (method == SaddleMethod::automatic) {
    method = stores.total_count() <= options.full_lp_sample_limit ? SaddleMethod::full_lp
                                                                   : SaddleMethod::column_generation;
  }
  return method == SaddleMethod::full_lp ? solve_full_lp(stores, bonuses, budget, options)
                                         : solve_column_generation(stores, bonuses, budget, options);
}

double brute_force_saddle(const SampleStore& stores, std::span<const double> bonuses,
                          std::span<const double> budget, double grid_step, double price_max) {
  const std::size_t d = stores.dim();
  if (d > 2) throw std::invalid_argument("brute_force_saddle: refuses d > 2");
  if (!(grid_step > 0.0) || !(price_max >= 0.0) || !std::isfinite(price_max)) {
    throw std::invalid_argument("brute_force_saddle: bad grid");
  }
  const std::size_t nodes = static_cast<std::size_t>(std::floor(price_max / grid_step + 1e-9)) + 1;
  const std::size_t K = stores.num_configs();
  auto envelope = [&](std::span<const double> p) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      const double bonus = bonuses.empty() ? 0.0 : bonuses[k];
      best = std::max(best, empirical_surplus(stores[k], p) + bonus);
    }
    return dot(p, budget) + best;
  };
  double best = std::numeric_limits<double>::infinity();
  Vec p(d, 0.0);
  if (d == 1) {
    for (std::size_t a = 0; a < nodes; ++a) {
      p[0] = static_cast<double>(a) * grid_step;
      best = std::min(best, envelope(p));
    }
  } else {
    for (std::size_t a = 0; a < nodes; ++a) {
      p[0] = static_cast<double>(a) * grid_step;
      for (std::size_t b = 0; b < nodes; ++b) {
        p[1] = static_cast<double>(b) * grid_step;
        best = std::min(best, envelope(p));
      }
    }
  }
  return best;
}

OracleEstimate v_mix(const ScenarioSpec& scenario, std::span<const double> budget,
                     std::size_t samples_per_config, Rng& rng, const SaddleOptions& options) {
  if (samples_per_config == 0) throw std::invalid_argument("v_mix: need at least one sample per configuration");
  SampleStore store(scenario.num_configs, scenario.dim);
  for (std::size_t k = 0; k < scenario.num_configs; ++k) {
    for (std::size_t n = 0; n < samples_per_config; ++n) {
      store.add(k, scenario.arrivals->draw_stationary(k, rng));
    }
  }
  const Vec zero(scenario.num_configs, 0.0);
  OracleEstimate est;
  est.saddle = solve_saddle(store, zero, budget, options);
  est.value = est.saddle.value;
  return est;
}

double offline_path_value(std::span<const RewardResourcePair> path,
                          std::span<const double> total_budget) {
  const std::size_t T = path.size();
  const std::size_t d = total_budget.size();
  lp::LinearProgram prog(T);
  for (std::size_t t = 0; t < T; ++t) {
    prog.objective[t] = -path[t].reward;
    prog.upper[t] = 1.0;
  }
  Vec row(T);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t t = 0; t < T; ++t) row[t] = path[t].consumption[i];
    prog.add_row(row, lp::Sense::less_equal, total_budget[i]);
  }
  auto sol = lp::solve(prog);
  if (sol.status != lp::Status::optimal) {
    throw std::runtime_error(std::string("offline LP: ") + lp::to_string(sol.status));
  }
  return -sol.objective_value;
}

double v_fixed(const ScenarioSpec& scenario, std::span<const double> budget, std::size_t horizon,
               std::size_t num_paths, Rng& rng) {
  if (horizon == 0 || num_paths == 0) throw std::invalid_argument("v_fixed: horizon and path count must be positive");
  Vec total(budget.begin(), budget.end());
  for (double& x : total) x *= static_cast<double>(horizon);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<RewardResourcePair> path(horizon);
  for (std::size_t k = 0; k < scenario.num_configs; ++k) {
    double sum = 0.0;
    for (std::size_t n = 0; n < num_paths; ++n) {
      for (auto& arrival : path) arrival = scenario.arrivals->draw_stationary(k, rng);
      sum += offline_path_value(path, total);
    }
    best = std::max(best, sum / static_cast<double>(num_paths));
  }
  return best;
}

KktTolerances KktTolerances::defaults(double reward_max, std::span<const double> budget,
                                      double price_max) {
  KktTolerances t;
  double l1 = 0.0;
  for (double b : budget) l1 += std::abs(b);
  t.envelope = 1e-6 * (1.0 + reward_max);
  t.weight = 1e-8;
  t.feasibility = 1e-6;
  t.complementarity = 1e-6 * (1.0 + l1 * price_max);
  t.tie = 1e-9 * (1.0 + reward_max);
  return t;
}

KktReport kkt_check(const Mixture& w, std::span<const double> price, const SampleStore& stores,
                    std::span<const double> budget, const KktTolerances& tol,
                    std::span<const double> bonuses) {
  const std::size_t K = stores.num_configs();
  const std::size_t d = stores.dim();
  KktReport report;

  Vec envelope(K);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    envelope[k] = empirical_surplus(stores[k], price) + (bonuses.empty() ? 0.0 : bonuses[k]);
    best = std::max(best, envelope[k]);
  }
  report.support_ok = true;
  for (std::size_t k = 0; k < K; ++k) {
    if (w[k] > tol.weight && envelope[k] < best - tol.envelope) report.support_ok = false;
  }

  Vec strict(d, 0.0), weak(d, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    if (w[k] == 0.0) continue;
    auto hs = empirical_consumption(stores[k], price, Threshold::strict, tol.tie);
    auto hw = empirical_consumption(stores[k], price, Threshold::weak, tol.tie);
    for (std::size_t i = 0; i < d; ++i) {
      strict[i] += w[k] * hs[i];
      weak[i] += w[k] * hw[i];
    }
  }
  report.feasible_ok = true;
  for (std::size_t i = 0; i < d; ++i) {
    if (strict[i] > budget[i] + tol.feasibility) report.feasible_ok = false;
  }
  const double pb = dot(price, budget);
  const double lo = dot(price, strict);
  const double hi = dot(price, weak);
  report.complementary_ok = lo - tol.complementarity <= pb && pb <= hi + tol.complementarity;
  return report;
}

}  // namespace switchbid
