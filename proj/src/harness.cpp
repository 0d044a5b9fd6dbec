#include "switchbid/harness.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <random>
#include <span>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "json.hpp"

namespace switchbid {

namespace {

using nlohmann::json;

// Bump when the oracle computation changes in a way that invalidates caches.
constexpr int kCacheVersion = 1;

std::string join(std::span<const double> v) {
  std::string s;
  for (double x : v) s += fmt::format("{}{}", s.empty() ? "" : ";", x);
  return s;
}

std::string scenario_key(const ScenarioSpec& s, const OracleSettings& settings) {
  return fmt::format("v{}|{}|K={}|d={}|R={}|A={}|P={}|b={}|seed={}|salt={:016x}", kCacheVersion, s.name,
                     s.num_configs, s.dim, s.reward_max, s.consumption_max, s.price_max, join(s.budget),
                     settings.seed, fnv1a(settings.cache_salt));
}

std::filesystem::path cache_file(const OracleSettings& settings, const std::string& key) {
  return settings.cache_dir / fmt::format("{:016x}.json", fnv1a(key));
}

std::optional<json> read_cache(const OracleSettings& settings, const std::string& key) {
  if (!settings.use_cache) return std::nullopt;
  std::ifstream in(cache_file(settings, key));
  if (!in) return std::nullopt;
  try {
    json doc = json::parse(in);
    // A hash collision or a stale file never masquerades as a hit.
    if (doc.value("key", std::string()) != key) return std::nullopt;
    return doc;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void write_cache(const OracleSettings& settings, const std::string& key, json doc) {
  if (!settings.use_cache) return;
  std::error_code ec;
  std::filesystem::create_directories(settings.cache_dir, ec);
  doc["key"] = key;
  const auto path = cache_file(settings, key);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) return;
    out << doc.dump(1);
  }
  std::filesystem::rename(tmp, path, ec);
}

json saddle_to_json(const SaddleSolution& s) {
  return {{"weights", s.weights.weights()}, {"price", s.price},           {"value", s.value},
          {"active_set", s.active_set},     {"consumption", s.consumption}, {"lp_solves", s.lp_solves}};
}

SaddleSolution saddle_from_json(const json& j) {
  SaddleSolution s;
  s.weights = Mixture::from_weights(j.at("weights").get<Vec>());
  s.price = j.at("price").get<Vec>();
  s.value = j.at("value").get<double>();
  s.active_set = j.at("active_set").get<std::vector<std::size_t>>();
  s.consumption = j.at("consumption").get<Vec>();
  s.lp_solves = j.at("lp_solves").get<std::size_t>();
  return s;
}

Rng derived_rng(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (auto p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

}  // namespace

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

OracleValues compute_oracle(const ScenarioSpec& scenario, std::size_t horizon, const OracleSettings& settings) {
  if (settings.mc_samples == 0) throw std::invalid_argument("mc-samples must be positive");
  OracleValues out;
  out.from_cache = true;
  const std::string base = scenario_key(scenario, settings);

  const std::string mix_key = fmt::format("{}|mix|mc={}", base, settings.mc_samples);
  if (auto hit = read_cache(settings, mix_key)) {
    out.v_mix = hit->at("v_mix").get<double>();
    out.saddle = saddle_from_json(hit->at("saddle"));
  } else {
    out.from_cache = false;
    Rng rng = derived_rng({settings.seed, 1});
    auto est = v_mix(scenario, scenario.budget, settings.mc_samples, rng);
    out.v_mix = est.value;
    out.saddle = std::move(est.saddle);
    write_cache(settings, mix_key, {{"v_mix", out.v_mix}, {"saddle", saddle_to_json(out.saddle)}});
  }

  if (settings.want_fixed) {
    if (settings.mc_paths == 0) throw std::invalid_argument("mc-paths must be positive");
    const std::string fixed_key = fmt::format("{}|fixed|T={}|paths={}", base, horizon, settings.mc_paths);
    if (auto hit = read_cache(settings, fixed_key)) {
      out.v_fixed = hit->at("v_fixed").get<double>();
    } else {
      out.from_cache = false;
      Rng rng = derived_rng({settings.seed, 2, horizon});
      out.v_fixed = v_fixed(scenario, scenario.budget, horizon, settings.mc_paths, rng);
      write_cache(settings, fixed_key, {{"v_fixed", *out.v_fixed}});
    }
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (!make_scenario) throw std::invalid_argument("no scenario");
  if (horizons.empty()) throw std::invalid_argument("no horizons given");
  if (policies.empty()) throw std::invalid_argument("no policies given");
  if (seed_last < seed_first) throw std::invalid_argument("seed range is empty");
  if (jobs == 0) throw std::invalid_argument("jobs must be positive");
  params.validate();
}

Rng run_rng(std::uint64_t seed, PolicyKind kind) {
  return derived_rng({seed, static_cast<std::uint64_t>(kind) + 1});
}

Moments moments(const std::vector<double>& values) {
  Moments m;
  if (values.empty()) return m;
  const double n = static_cast<double>(values.size());
  for (double v : values) m.mean += v;
  m.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / (n - 1.0));
    m.se = m.std / std::sqrt(n);
  }
  return m;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;

  struct Task {
    std::size_t horizon;
    PolicyKind policy;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  std::map<std::size_t, ScenarioSpec> scenarios;
  for (std::size_t T : config.horizons) {
    auto scenario = config.make_scenario(T);
    for (auto kind : config.policies) {
      const bool warm = kind == PolicyKind::spucb || kind == PolicyKind::greedy || kind == PolicyKind::onehot;
      if (warm && T <= scenario.num_configs) {
        throw std::invalid_argument(fmt::format("T = {} must exceed K = {} for {}", T, scenario.num_configs,
                                                to_string(kind)));
      }
    }
    OracleSettings settings = config.oracle;
    if (config.verbose) fmt::print(stderr, "oracle: {} T={}\n", scenario.name, T);
    OracleValues oracle;
    if (!config.oracle_per_horizon && !result.oracles.empty()) {
      // v_mix is horizon free here; only v_fixed needs recomputing.
      oracle = result.oracles.begin()->second;
      oracle.v_fixed.reset();
      if (settings.want_fixed) oracle.v_fixed = compute_oracle(scenario, T, settings).v_fixed;
    } else {
      oracle = compute_oracle(scenario, T, settings);
    }
    if (!(oracle.v_mix > 0.0)) {
      throw std::runtime_error(fmt::format("{}: mixed benchmark is {}; ratios are undefined", scenario.name,
                                           oracle.v_mix));
    }
    result.oracles[T] = std::move(oracle);
    scenarios.emplace(T, std::move(scenario));
    for (auto kind : config.policies) {
      for (std::uint64_t s = config.seed_first;; ++s) {
        tasks.push_back({T, kind, s});
        if (s == config.seed_last) break;
      }
    }
  }

  result.runs.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      const Task& task = tasks[i];
      try {
        const auto& scenario = scenarios.at(task.horizon);
        const auto& oracle = result.oracles.at(task.horizon);
        Rng rng = run_rng(task.seed, task.policy);
        auto rec = run_policy(task.policy, scenario, task.horizon, config.params, rng, &oracle.saddle);
        RunRow row;
        row.scenario = config.scenario_label.empty() ? scenario.name : config.scenario_label;
        row.policy = task.policy;
        row.alpha = task.policy == PolicyKind::greedy ? 0.0 : config.params.alpha;
        row.rho = config.rho;
        row.horizon = task.horizon;
        row.seed = task.seed;
        row.total_reward = rec.total_reward;
        row.regret_mix = regret_mix(rec, oracle.v_mix, task.horizon);
        row.cr_mix = mix_ratio(rec.total_reward, oracle.v_mix, task.horizon);
        if (oracle.v_fixed) row.cr_star = star_ratio(rec.total_reward, *oracle.v_fixed);
        row.solve_count = rec.solve_count;
        row.log = std::move(rec.log);
        result.runs[i] = std::move(row);
        if (config.verbose) {
          fmt::print(stderr, "run: {} T={} seed={} reward={:.3f}\n", to_string(task.policy), task.horizon, task.seed,
                     result.runs[i].total_reward);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(config.jobs, tasks.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t i = 0;
  while (i < result.runs.size()) {
    std::size_t j = i;
    std::vector<double> reward, regret, scaled, mix, star;
    while (j < result.runs.size() && result.runs[j].horizon == result.runs[i].horizon &&
           result.runs[j].policy == result.runs[i].policy) {
      const auto& r = result.runs[j];
      reward.push_back(r.total_reward);
      regret.push_back(r.regret_mix);
      scaled.push_back(r.regret_mix / std::sqrt(static_cast<double>(r.horizon)));
      mix.push_back(r.cr_mix);
      if (r.cr_star) star.push_back(*r.cr_star);
      ++j;
    }
    const auto& first = result.runs[i];
    SummaryRow s;
    s.scenario = first.scenario;
    s.policy = first.policy;
    s.alpha = first.alpha;
    s.rho = first.rho;
    s.horizon = first.horizon;
    s.runs = j - i;
    s.v_mix = result.oracles.at(first.horizon).v_mix;
    s.v_fixed = result.oracles.at(first.horizon).v_fixed;
    s.total_reward = moments(reward);
    s.regret = moments(regret);
    s.regret_per_sqrt_t = moments(scaled);
    s.cr_mix = moments(mix);
    if (!star.empty()) s.cr_star = moments(star);
    result.summary.push_back(std::move(s));
    i = j;
  }
  return result;
}

void write_runs_csv(std::ostream& out, const ExperimentResult& result, const std::string& comment) {
  if (!comment.empty()) fmt::print(out, "# {}\n", comment);
  fmt::print(out, "scenario,policy,alpha,rho,T,seed,total_reward,regret_mix,cr_mix,cr_star,solve_count\n");
  for (const auto& r : result.runs) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{}\n", r.scenario, to_string(r.policy), r.alpha, r.rho,
               r.horizon, r.seed, r.total_reward, r.regret_mix, r.cr_mix, fmt_opt(r.cr_star), r.solve_count);
  }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result, const std::string& comment) {
  if (!comment.empty()) fmt::print(out, "# {}\n", comment);
  fmt::print(out,
             "scenario,policy,alpha,rho,T,runs,v_mix,v_fixed,reward_mean,reward_std,regret_mean,regret_std,"
             "regret_sqrt_t_mean,regret_sqrt_t_std,cr_mix_mean,cr_mix_std,cr_mix_se,cr_star_mean,cr_star_std\n");
  for (const auto& s : result.summary) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", s.scenario, to_string(s.policy),
               s.alpha, s.rho, s.horizon, s.runs, s.v_mix, fmt_opt(s.v_fixed), s.total_reward.mean,
               s.total_reward.std, s.regret.mean, s.regret.std, s.regret_per_sqrt_t.mean, s.regret_per_sqrt_t.std,
               s.cr_mix.mean, s.cr_mix.std, s.cr_mix.se,
               s.cr_star ? fmt::format("{}", s.cr_star->mean) : std::string(),
               s.cr_star ? fmt::format("{}", s.cr_star->std) : std::string());
  }
}

void write_trajectory_csv(std::ostream& out, const ExperimentResult& result) {
  fmt::print(out, "scenario,policy,T,seed,t,config,reward,accepted,cumulative_reward\n");
  for (const auto& r : result.runs) {
    double cumulative = 0.0;
    for (std::size_t t = 0; t < r.log.size(); ++t) {
      const auto& e = r.log[t];
      if (e.accepted) cumulative += e.reward;
      fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", r.scenario, to_string(r.policy), r.horizon, r.seed, t + 1,
                 e.config, e.reward, e.accepted ? 1 : 0, cumulative);
    }
  }
}

OracleReport cmd_oracle(const ScenarioSpec& scenario, std::size_t horizon, OracleSettings settings) {
  if (horizon == 0) throw std::invalid_argument("T must be positive");
  settings.want_fixed = true;
  auto values = compute_oracle(scenario, horizon, settings);
  OracleReport r;
  r.scenario = scenario.name;
  r.rho = scenario.rho;
  r.horizon = horizon;
  r.mc_samples = settings.mc_samples;
  r.mc_paths = settings.mc_paths;
  r.v_mix = values.v_mix;
  r.total_mix = values.v_mix * static_cast<double>(horizon);
  r.v_fixed = *values.v_fixed;
  r.gap = r.v_fixed > 0.0 ? r.total_mix / r.v_fixed : std::numeric_limits<double>::infinity();
  return r;
}

void write_oracle_csv(std::ostream& out, const OracleReport& r) {
  fmt::print(out, "scenario,rho,T,mc_samples,mc_paths,v_mix,T_v_mix,v_fixed,gap\n");
  fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", r.scenario, r.rho, r.horizon, r.mc_samples, r.mc_paths, r.v_mix,
             r.total_mix, r.v_fixed, r.gap);
}

namespace {

template <class T>
T parse_integer(std::string_view s, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument(fmt::format("invalid {} '{}'", what, s));
  }
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = s.find(sep);
    parts.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) return parts;
    s.remove_prefix(pos + 1);
  }
}

}  // namespace

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto s = parse_integer<std::uint64_t>(text, "seed");
    return {s, s};
  }
  const auto a = parse_integer<std::uint64_t>(std::string_view(text).substr(0, dots), "seed");
  const auto b = parse_integer<std::uint64_t>(std::string_view(text).substr(dots + 2), "seed");
  if (b < a) throw std::invalid_argument("seed range '" + text + "' is empty");
  return {a, b};
}

std::vector<std::size_t> parse_horizons(const std::string& text) {
  std::vector<std::size_t> out;
  for (auto part : split(text, ',')) {
    const auto T = parse_integer<std::size_t>(part, "horizon");
    if (T == 0) throw std::invalid_argument("horizon must be positive");
    out.push_back(T);
  }
  return out;
}

std::vector<PolicyKind> parse_policies(const std::string& text) {
  if (text == "all") return all_policy_kinds();
  std::vector<PolicyKind> out;
  for (auto part : split(text, ',')) out.push_back(parse_policy_kind(std::string(part)));
  return out;
}

}  // namespace switchbid
