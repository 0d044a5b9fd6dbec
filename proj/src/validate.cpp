#include "switchbid/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <random>

#include <fmt/format.h>

#include "switchbid/fluid_oracle.hpp"
#include "switchbid/lp_solver.hpp"
#include "switchbid/policy.hpp"
#include "switchbid/reference.hpp"
#include "switchbid/scenarios.hpp"

namespace switchbid {

namespace {

// Collects the outcome of one property: a case count and the first failure.
class Probe {
 public:
  Probe(const ValidateOptions& options, Rng rng) : options(options), rng(std::move(rng)) {}

  const ValidateOptions& options;
  Rng rng;

  template <class... Args>
  bool expect(bool cond, fmt::format_string<Args...> what, Args&&... args) {
    if (!cond && failure_.empty()) failure_ = fmt::format(what, std::forward<Args>(args)...);
    if (!cond) ++failures_;
    return cond;
  }
  void count(std::size_t n = 1) { cases_ += n; }

  std::size_t cases() const { return cases_; }
  std::size_t failures() const { return failures_; }
  const std::string& failure() const { return failure_; }

 private:
  std::size_t cases_ = 0;
  std::size_t failures_ = 0;
  std::string failure_;
};

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

SampleStore random_store(Rng& rng, std::size_t K, std::size_t d, std::size_t max_n, double r_hi) {
  SampleStore store(K, d);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t n = pick(rng, 1, max_n);
    for (std::size_t j = 0; j < n; ++j) {
      RewardResourcePair pair{uniform(rng, 0.0, r_hi), Vec(d)};
      for (auto& a : pair.consumption) a = uniform(rng, 0.0, 1.0);
      store.add(k, pair);
    }
  }
  return store;
}

Vec random_vec(Rng& rng, std::size_t n, double lo, double hi) {
  Vec v(n);
  for (auto& x : v) x = uniform(rng, lo, hi);
  return v;
}

Mixture random_mixture(Rng& rng, std::size_t K) {
  std::exponential_distribution<double> e(1.0);
  Vec w(K);
  double total = 0.0;
  for (auto& x : w) total += (x = e(rng));
  for (auto& x : w) x /= total;
  return Mixture::from_weights(std::move(w), 1e-9);
}

double min_of(std::span<const double> v) { return *std::min_element(v.begin(), v.end()); }

// --- LP solver ---------------------------------------------------------

void lp_vertex_enumeration(Probe& t) {
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = pick(t.rng, 1, 5);
    const std::size_t m = pick(t.rng, 1, 8);
    auto prog = reference::random_bounded_lp(t.rng, n, m);
    auto oracle = reference::vertex_enumeration_minimum(prog);
    t.count();
    if (!t.expect(oracle.has_value(), "trial {}: generator produced an infeasible LP", trial)) continue;
    lp::LpSolution sol;
    try {
      sol = lp::solve(prog);
    } catch (const std::exception& e) {
      t.expect(false, "trial {} ({}x{}): {}", trial, m, n, e.what());
      continue;
    }
    if (!t.expect(sol.status == lp::Status::optimal, "trial {}: status {}", trial, lp::to_string(sol.status))) {
      continue;
    }
    t.expect(std::abs(sol.objective_value - *oracle) <= 1e-6, "trial {}: simplex {} vs vertices {}", trial,
             sol.objective_value, *oracle);
    const auto cert = lp::certify(prog, sol);
    t.expect(cert.max_primal_violation <= 1e-7, "trial {}: primal violation {}", trial, cert.max_primal_violation);
    t.expect(cert.max_dual_sign_violation <= 1e-7, "trial {}: dual sign violation {}", trial,
             cert.max_dual_sign_violation);
    t.expect(cert.duality_gap <= 1e-6, "trial {}: duality gap {}", trial, cert.duality_gap);
    t.expect(cert.max_complementarity <= 1e-6, "trial {}: complementarity {}", trial, cert.max_complementarity);
  }
}

// --- Saddle LP ---------------------------------------------------------

void saddle_brute_force(Probe& t) {
  constexpr double step = 0.005;
  constexpr double max_bonus = 0.5;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t K = pick(t.rng, 1, 3);
    const std::size_t d = pick(t.rng, 1, 2);
    auto store = random_store(t.rng, K, d, 6, 1.0);
    const Vec b = random_vec(t.rng, d, 0.25, 0.6);
    const Vec beta = random_vec(t.rng, K, 0.0, max_bonus);
    // The minimizer satisfies <p, b> <= L(0) <= 1 + max bonus.
    const double p_max = (1.0 + max_bonus) / min_of(b);
    t.count();
    SaddleSolution sol;
    try {
      sol = solve_saddle(store, beta, b);
    } catch (const std::exception& e) {
      t.expect(false, "trial {}: {}", trial, e.what());
      continue;
    }
    const double grid = brute_force_saddle(store, beta, b, step, p_max);
    t.expect(std::abs(sol.value - grid) <= 0.02, "trial {} (K={}, d={}): LP {} vs grid {}", trial, K, d, sol.value,
             grid);
    auto tol = KktTolerances::defaults(1.0, b, p_max);
    auto kkt = kkt_check(sol.weights, sol.price, store, b, tol, beta);
    t.expect(kkt.support_ok, "trial {}: envelope support fails", trial);
    t.expect(kkt.feasible_ok, "trial {}: consumption feasibility fails", trial);
    t.expect(kkt.complementary_ok, "trial {}: complementarity fails", trial);
  }
}

void saddle_kkt_large(Probe& t) {
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t K = pick(t.rng, 1, 5);
    const std::size_t d = pick(t.rng, 1, 3);
    auto store = random_store(t.rng, K, d, 120, 2.0);
    const Vec b = random_vec(t.rng, d, 0.1, 0.6);
    const Vec beta = trial % 2 ? random_vec(t.rng, K, 0.0, 0.3) : Vec(K, 0.0);
    t.count();
    try {
      SaddleOptions cg;
      cg.method = SaddleMethod::column_generation;
      auto sol = solve_saddle(store, beta, b, cg);
      auto tol = KktTolerances::defaults(2.0, b, default_price_max(2.0, b));
      t.expect(kkt_check(sol.weights, sol.price, store, b, tol, beta).all(), "trial {} (K={}, d={}): KKT fails",
               trial, K, d);
      t.expect(std::abs(sol.value - saddle_objective(store, beta, b, sol.weights, sol.price)) <=
                   1e-7 * (1.0 + std::abs(sol.value)),
               "trial {}: value does not match L(w, p)", trial);
    } catch (const std::exception& e) {
      t.expect(false, "trial {}: {}", trial, e.what());
    }
  }
}

void saddle_inequalities(Probe& t) {
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t K = pick(t.rng, 1, 4);
    const std::size_t d = pick(t.rng, 1, 3);
    auto store = random_store(t.rng, K, d, 20, 2.0);
    const Vec b = random_vec(t.rng, d, 0.1, 0.6);
    const Vec beta = random_vec(t.rng, K, 0.0, 0.3);
    auto sol = solve_saddle(store, beta, b);
    const double at = saddle_objective(store, beta, b, sol.weights, sol.price);
    const double tol = 1e-7 * (1.0 + std::abs(at));
    for (int probe = 0; probe < 20; ++probe) {
      t.count();
      const Vec p = random_vec(t.rng, d, 0.0, 2.0 / min_of(b));
      const Mixture w = random_mixture(t.rng, K);
      t.expect(saddle_objective(store, beta, b, sol.weights, p) >= at - tol,
               "trial {}: L(w*, p) below L(w*, p*)", trial);
      t.expect(saddle_objective(store, beta, b, w, sol.price) <= at + tol, "trial {}: L(w, p*) above L(w*, p*)",
               trial);
    }
  }
}

void price_box(Probe& t) {
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t K = pick(t.rng, 1, 4);
    const std::size_t d = pick(t.rng, 1, 3);
    const double r_max = uniform(t.rng, 0.5, 3.0);
    auto store = random_store(t.rng, K, d, 40, r_max);
    const Vec b = random_vec(t.rng, d, 0.05, 0.8);
    t.count();
    auto sol = solve_saddle(store, Vec(K, 0.0), b);
    const double bound = r_max / min_of(b) + 1e-6;
    for (double p : sol.price) {
      t.expect(p >= 0.0 && p <= bound, "trial {}: price {} outside [0, {}]", trial, p, bound);
    }
  }
}

// --- Surplus and consumption -------------------------------------------

void surplus_inequality(Probe& t) {
  // x is the admission decision itself, plus the two constant choices.
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t d = pick(t.rng, 1, 3);
    RewardResourcePair pair{uniform(t.rng, 0.0, 2.0), random_vec(t.rng, d, 0.0, 1.0)};
    Vec p = random_vec(t.rng, d, 0.0, 4.0);
    if (trial % 4 == 0) {
      // Land exactly on the threshold: rescale p so <p, a> = r.
      const double pa = dot(p, pair.consumption);
      if (pa > 0.0) {
        for (auto& x : p) x *= pair.reward / pa;
        pair.reward = dot(p, pair.consumption);
      }
    }
    const double pa = dot(p, pair.consumption);
    const double surplus = std::max(0.0, pair.reward - pa);
    BudgetState budget = BudgetState::make(Vec(d, 1e9), 1);
    const bool admitted = admit(pair, p, budget, t.options.admission) == Decision::accept;
    t.count();
    for (double x : {0.0, 1.0, admitted ? 1.0 : 0.0}) {
      t.expect(pair.reward * x <= pa * x + surplus + 1e-12, "trial {}: r x = {} exceeds <p,a> x + (r - <p,a>)_+ = {}",
               trial, pair.reward * x, pa * x + surplus);
    }
    // The threshold decision attains the bound.
    const double x = admitted ? 1.0 : 0.0;
    t.expect(std::abs(pair.reward * x - (pa * x + surplus)) <= 1e-9 * (1.0 + pair.reward),
             "trial {}: admitted arrival does not attain the surplus identity", trial);
  }
}

void tie_separation(Probe& t) {
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = pick(t.rng, 1, 3);
    // Dyadic values make <p, a> exact, so r = <p, a> is a true tie.
    Vec a(d), p(d);
    for (auto& x : a) x = static_cast<double>(pick(t.rng, 1, 16)) / 16.0;
    for (auto& x : p) x = static_cast<double>(pick(t.rng, 0, 32)) / 8.0;
    const double r = dot(p, a);
    BudgetState budget = BudgetState::make(Vec(d, 1e9), 1);
    t.count();
    t.expect(admit({r, a}, p, budget, t.options.admission) == Decision::reject,
             "trial {}: arrival with r = <p, a> = {} was admitted", trial, r);
    const double above = std::nextafter(r, 1e9);
    t.expect(admit({above, a}, p, budget, t.options.admission) == Decision::accept,
             "trial {}: arrival just above the threshold was rejected", trial);
  }
}

void consumption_sandwich(Probe& t) {
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = pick(t.rng, 1, 3);
    SampleSet set(d);
    const Vec p = random_vec(t.rng, d, 0.0, 3.0);
    for (int j = 0; j < 100; ++j) {
      Vec a = random_vec(t.rng, d, 0.0, 1.0);
      // A third of the samples sit on the threshold.
      const double r = j % 3 == 0 ? dot(p, a) : uniform(t.rng, 0.0, 2.0);
      set.push(r, a);
    }
    t.count();
    const Vec strict = empirical_consumption(set, p, Threshold::strict);
    const Vec weak = empirical_consumption(set, p, Threshold::weak);
    for (std::size_t i = 0; i < d; ++i) {
      t.expect(strict[i] <= weak[i] + 1e-15, "trial {}: strict {} exceeds weak {}", trial, strict[i], weak[i]);
    }
  }
}

void surplus_shape(Probe& t) {
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = pick(t.rng, 1, 3);
    auto store = random_store(t.rng, 1, d, 30, 2.0);
    const Vec p = random_vec(t.rng, d, 0.0, 3.0);
    const Vec q = random_vec(t.rng, d, 0.0, 3.0);
    const Vec u = random_vec(t.rng, d, 0.0, 1.0);
    Vec up(d), mid(d);
    for (std::size_t i = 0; i < d; ++i) {
      up[i] = p[i] + u[i];
      mid[i] = 0.5 * (p[i] + q[i]);
    }
    const double gp = empirical_surplus(store[0], p);
    const double gq = empirical_surplus(store[0], q);
    t.count();
    t.expect(empirical_surplus(store[0], up) <= gp + 1e-12, "trial {}: surplus increases with price", trial);
    t.expect(empirical_surplus(store[0], mid) <= 0.5 * (gp + gq) + 1e-12, "trial {}: surplus not convex", trial);
    t.expect(gp >= 0.0, "trial {}: negative surplus", trial);
  }
}

// --- Policies ----------------------------------------------------------

struct PolicyCase {
  std::string scenario;
  double rho;
};

// Oracle saddles for the baseline runs, one per (scenario, rho).
const SaddleSolution& oracle_saddle(const ScenarioSpec& s, std::map<std::string, SaddleSolution>& cache, Rng& rng) {
  const auto key = fmt::format("{}/{}", s.name, s.rho);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, v_mix(s, s.budget, 500, rng).saddle).first;
  return it->second;
}

void budget_feasibility(Probe& t) {
  std::map<std::string, SaddleSolution> saddles;
  PolicyParams params;
  params.admission = t.options.admission;
  for (const auto& name : builtin_scenarios()) {
    for (double rho : {0.0, 0.3, 0.7, 1.2}) {
      const auto s = make_scenario(name, rho);
      const SaddleSolution* saddle = rho > 0.0 ? &oracle_saddle(s, saddles, t.rng) : nullptr;
      for (auto kind : all_policy_kinds()) {
        if (kind == PolicyKind::oracle && !saddle) continue;
        for (int seed = 0; seed < 3; ++seed) {
          const std::size_t T = 150 + 100 * static_cast<std::size_t>(seed);
          Rng rng(t.rng());
          auto rec = run_policy(kind, s, T, params, rng, saddle);
          Vec used(s.dim, 0.0);
          double reward = 0.0;
          for (const auto& e : rec.log) {
            if (!e.accepted) continue;
            reward += e.reward;
            for (std::size_t i = 0; i < s.dim; ++i) used[i] += e.consumption[i];
          }
          const Vec total = s.total_budget(T);
          t.count();
          for (std::size_t i = 0; i < s.dim; ++i) {
            t.expect(used[i] <= total[i] + 1e-9 * (1.0 + total[i]), "{} {} rho={} T={}: resource {} used {} of {}",
                     to_string(kind), name, rho, T, i, used[i], total[i]);
            t.expect(rec.budget.remaining[i] >= -1e-9, "{} {}: negative remaining budget", to_string(kind), name);
          }
          t.expect(std::abs(reward - rec.total_reward) <= 1e-9 * (1.0 + reward), "{} {}: log and total disagree",
                   to_string(kind), name);
          t.expect(rec.log.size() == T, "{} {}: log has {} rounds, expected {}", to_string(kind), name,
                   rec.log.size(), T);
        }
      }
    }
  }
}

void mixture_sampling(Probe& t) {
  constexpr std::size_t draws = 40000;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t K = pick(t.rng, 1, 6);
    const Mixture w = trial == 0 ? Mixture::one_hot(K, K - 1) : random_mixture(t.rng, K);
    std::vector<std::size_t> hits(K, 0);
    for (std::size_t n = 0; n < draws; ++n) ++hits[w.sample(t.rng)];
    t.count();
    for (std::size_t k = 0; k < K; ++k) {
      const double freq = static_cast<double>(hits[k]) / draws;
      // Five standard errors, plus a floor so near-zero weights do not trip on a single draw.
      const double band = 5.0 * std::sqrt(w[k] * (1.0 - w[k]) / draws) + 1e-4;
      t.expect(std::abs(freq - w[k]) <= band, "trial {}: config {} drawn {} vs weight {}", trial, k, freq, w[k]);
    }
  }
}

void warm_start(Probe& t) {
  PolicyParams params;
  params.admission = t.options.admission;
  for (const auto& name : builtin_scenarios()) {
    const auto s = make_scenario(name, 0.7);
    for (auto kind : {PolicyKind::spucb, PolicyKind::greedy, PolicyKind::onehot}) {
      Rng rng(t.rng());
      auto rec = run_policy(kind, s, 40, params, rng);
      t.count();
      for (std::size_t k = 0; k < s.num_configs; ++k) {
        t.expect(rec.log[k].config == k, "{} {}: warm-start round {} played config {}", to_string(kind), name, k + 1,
                 rec.log[k].config);
        t.expect(!rec.log[k].accepted, "{} {}: warm-start round {} admitted", to_string(kind), name, k + 1);
      }
    }
  }
}

void doubling_schedule(Probe& t) {
  for (const auto& name : builtin_scenarios()) {
    const auto s = make_scenario(name, 0.7);
    const double K = static_cast<double>(s.num_configs);
    for (std::size_t T : {50, 300, 1500}) {
      PolicyParams params;
      params.admission = t.options.admission;
      params.record_log = false;
      Rng rng(t.rng());
      auto rec = run_spucb(s, T, params, rng);
      const double bound = K * (std::log2(static_cast<double>(T)) + 2.0) + 1.0;
      t.count();
      t.expect(rec.solve_count >= 1 && static_cast<double>(rec.solve_count) <= bound,
               "{} T={}: {} solves, bound {}", name, T, rec.solve_count, bound);
    }
    PolicyParams every;
    every.admission = t.options.admission;
    every.record_log = false;
    every.schedule = ResolveSchedule::every_round;
    Rng rng(t.rng());
    const std::size_t T = 60;
    auto rec = run_spucb(s, T, every, rng);
    t.count();
    t.expect(rec.solve_count == T - s.num_configs, "{} every-round: {} solves, expected {}", name, rec.solve_count,
             T - s.num_configs);
  }
}

void greedy_equivalence(Probe& t) {
  for (const auto& name : builtin_scenarios()) {
    const auto s = make_scenario(name, 0.7);
    for (int seed = 0; seed < 4; ++seed) {
      const auto root = t.rng();
      PolicyParams params;
      params.alpha = 1.5;
      params.admission = t.options.admission;
      Rng a(root), b(root);
      auto greedy = run_policy(PolicyKind::greedy, s, 300, params, a);
      params.alpha = 0.0;
      auto spucb = run_spucb(s, 300, params, b);
      bool same = greedy.total_reward == spucb.total_reward && greedy.solve_count == spucb.solve_count &&
                  greedy.log.size() == spucb.log.size();
      for (std::size_t i = 0; same && i < greedy.log.size(); ++i) {
        same = greedy.log[i].config == spucb.log[i].config && greedy.log[i].accepted == spucb.log[i].accepted;
      }
      t.count();
      t.expect(same, "{} seed {}: greedy differs from spucb with alpha = 0", name, seed);
    }
  }
}

struct Property {
  const char* name;
  void (*run)(Probe&);
};

constexpr Property kProperties[] = {
    {"lp_vertex_enumeration", lp_vertex_enumeration},
    {"saddle_brute_force", saddle_brute_force},
    {"saddle_kkt", saddle_kkt_large},
    {"saddle_inequalities", saddle_inequalities},
    {"price_box", price_box},
    {"surplus_inequality", surplus_inequality},
    {"tie_separation", tie_separation},
    {"consumption_sandwich", consumption_sandwich},
    {"surplus_monotone_convex", surplus_shape},
    {"budget_feasibility", budget_feasibility},
    {"mixture_sampling", mixture_sampling},
    {"warm_start", warm_start},
    {"doubling_schedule", doubling_schedule},
    {"greedy_equivalence", greedy_equivalence},
};

}  // namespace

bool ValidateReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.passed; });
}

std::vector<std::string> property_names() {
  std::vector<std::string> names;
  for (const auto& p : kProperties) names.emplace_back(p.name);
  return names;
}

ValidateReport run_validation(const ValidateOptions& options,
                              const std::function<void(const PropertyResult&)>& on_result) {
  ValidateReport report;
  for (std::size_t i = 0; i < std::size(kProperties); ++i) {
    const auto& prop = kProperties[i];
    if (std::string_view(prop.name).find(options.filter) == std::string_view::npos) continue;
    // Each property gets its own stream so a filter does not shift the others.
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    Probe probe(options, Rng(seq));
    PropertyResult result;
    result.name = prop.name;
    const auto start = std::chrono::steady_clock::now();
    try {
      prop.run(probe);
      result.passed = probe.failures() == 0;
      result.detail = result.passed ? fmt::format("{} cases", probe.cases())
                                    : fmt::format("{} failed checks over {} cases; first: {}", probe.failures(),
                                                  probe.cases(), probe.failure());
    } catch (const std::exception& e) {
      result.passed = false;
      result.detail = fmt::format("aborted after {} cases: {}", probe.cases(), e.what());
    }
    result.cases = probe.cases();
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(result);
    report.results.push_back(std::move(result));
  }
  return report;
}

}  // namespace switchbid
