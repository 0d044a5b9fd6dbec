#include "switchbid/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace switchbid {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double uniform(double lo, double hi, Rng& rng) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void check_config(const ConfigDistribution& config, std::size_t dim) {
  std::visit(overloaded{
                 [&](const GaussianConfig& g) {
                   if (g.mu_a.size() != dim || g.sigma_a.size() != dim) {
                     throw std::invalid_argument("gaussian config: consumption size mismatch");
                   }
                   if (!(g.sigma_r > 0.0)) throw std::invalid_argument("gaussian config: sigma_r must be positive");
                   for (double s : g.sigma_a) {
                     if (!(s > 0.0)) throw std::invalid_argument("gaussian config: sigma_a must be positive");
                   }
                 },
                 [&](const UniformConfig& u) {
                   if (u.a_lo.size() != dim || u.a_hi.size() != dim) {
                     throw std::invalid_argument("uniform config: consumption size mismatch");
                   }
                   if (u.r_lo > u.r_hi) throw std::invalid_argument("uniform config: empty reward range");
                   for (std::size_t i = 0; i < dim; ++i) {
                     if (u.a_lo[i] > u.a_hi[i]) throw std::invalid_argument("uniform config: empty consumption range");
                   }
                 },
                 [&](const OrthogonalUnitConfig& o) {
                   if (o.resource >= dim) throw std::invalid_argument("orthogonal config: resource out of range");
                   if (o.r_lo > o.r_hi || o.noise < 0.0) throw std::invalid_argument("orthogonal config: bad range");
                 },
             },
             config);
}

}  // namespace

double truncated_normal(double mu, double sigma, double lo, double hi, Rng& rng, int max_attempts) {
  std::normal_distribution<double> normal(mu, sigma);
  for (int i = 0; i < max_attempts; ++i) {
    const double x = normal(rng);
    if (x >= lo && x <= hi) return x;
  }
  throw std::runtime_error("truncated_normal: no draw in range after " + std::to_string(max_attempts) +
                           " attempts");
}

RewardResourcePair clip_and_jitter(double reward, Vec consumption, double reward_max,
                                   double consumption_max, double eta, Rng& rng) {
  RewardResourcePair pair{std::clamp(reward, 0.0, reward_max), std::move(consumption)};
  for (double& a : pair.consumption) a = std::clamp(a, 0.0, consumption_max);
  if (eta > 0.0) {
    pair.reward = std::clamp(pair.reward + uniform(-eta, eta, rng), 0.0, reward_max);
  }
  return pair;
}

SyntheticArrivals::SyntheticArrivals(std::vector<ConfigDistribution> configs, std::size_t dim,
                                     double reward_max, double consumption_max, double jitter)
    : configs_(std::move(configs)),
      dim_(dim),
      reward_max_(reward_max),
      consumption_max_(consumption_max),
      jitter_(jitter) {
  for (const auto& c : configs_) check_config(c, dim_);
}

RewardResourcePair SyntheticArrivals::draw(std::size_t config, std::size_t, Rng& rng) const {
  RewardResourcePair pair{0.0, Vec(dim_, 0.0)};
  std::visit(overloaded{
                 [&](const GaussianConfig& g) {
                   pair.reward = truncated_normal(g.mu_r, g.sigma_r, g.lower, reward_max_, rng);
                   for (std::size_t i = 0; i < dim_; ++i) {
                     pair.consumption[i] = truncated_normal(g.mu_a[i], g.sigma_a[i], g.lower, consumption_max_, rng);
                   }
                 },
                 [&](const UniformConfig& u) {
                   pair.reward = uniform(u.r_lo, u.r_hi, rng);
                   for (std::size_t i = 0; i < dim_; ++i) pair.consumption[i] = uniform(u.a_lo[i], u.a_hi[i], rng);
                 },
                 [&](const OrthogonalUnitConfig& o) {
                   pair.reward = uniform(o.r_lo, o.r_hi, rng);
                   for (std::size_t i = 0; i < dim_; ++i) {
                     const double base = i == o.resource ? 1.0 : 0.0;
                     pair.consumption[i] = std::max(0.0, base + uniform(-o.noise, o.noise, rng));
                   }
                 },
             },
             configs_.at(config));
  if (jitter_ >= 0.0) {
    return clip_and_jitter(pair.reward, std::move(pair.consumption), reward_max_, consumption_max_, jitter_, rng);
  }
  return pair;
}

namespace {

ScenarioSpec assemble(std::string name, std::vector<ConfigDistribution> configs, std::size_t dim,
                      double reward_max, double consumption_max, Vec b0, double rho,
                      double price_max, double jitter) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument(name + ": rho must be nonnegative");
  ScenarioSpec s;
  s.name = std::move(name);
  s.num_configs = configs.size();
  s.dim = dim;
  s.reward_max = reward_max;
  s.consumption_max = consumption_max;
  s.baseline_budget = std::move(b0);
  s.rho = rho;
  s.budget = s.baseline_budget;
  for (double& b : s.budget) b *= rho;
  // A zero budget has no finite price box; fall back to the baseline there.
  s.price_max = price_max > 0.0 ? price_max
                                : default_price_max(reward_max, rho > 0.0 ? s.budget : s.baseline_budget);
  s.arrivals = std::make_shared<SyntheticArrivals>(std::move(configs), dim, reward_max, consumption_max, jitter);
  s.validate();
  return s;
}

}  // namespace

ScenarioSpec make_s0(double rho) {
  const Vec sd{0.2, 0.2, 0.2};
  std::vector<ConfigDistribution> configs{
      GaussianConfig{1.0, 0.3, {0.8, 0.2, 0.2}, sd},
      GaussianConfig{0.8, 0.3, {0.2, 0.7, 0.2}, sd},
      GaussianConfig{0.6, 0.3, {0.2, 0.2, 0.6}, sd},
      GaussianConfig{0.9, 0.3, {0.5, 0.5, 0.5}, sd},
      GaussianConfig{0.4, 0.3, {0.1, 0.1, 0.1}, sd},
  };
  // P_max only enters the confidence radius; S0 pins it at 2.
  return assemble("s0", std::move(configs), 3, 2.0, 2.0, {0.8, 0.2, 0.2}, rho, 2.0, -1.0);
}

ScenarioSpec make_s4(double rho) {
  std::vector<ConfigDistribution> configs{
      OrthogonalUnitConfig{0, 0.99, 1.01, 0.01},
      OrthogonalUnitConfig{1, 0.99, 1.01, 0.01},
  };
  return assemble("s4", std::move(configs), 2, 10.0, 2.0, {0.5, 0.5}, rho, 0.0, -1.0);
}

ScenarioSpec make_example1(double rho) {
  std::vector<ConfigDistribution> configs{
      OrthogonalUnitConfig{0, 0.0, 2.0, 0.0},
      OrthogonalUnitConfig{1, 0.0, 2.0, 0.0},
  };
  return assemble("example1", std::move(configs), 2, 2.0, 1.0, {0.5, 0.5}, rho, 0.0, -1.0);
}

std::vector<std::string> builtin_scenarios() { return {"s0", "s4", "example1"}; }

ScenarioSpec make_scenario(const std::string& name_or_path, double rho) {
  if (name_or_path == "s0") return make_s0(rho);
  if (name_or_path == "s4") return make_s4(rho);
  if (name_or_path == "example1") return make_example1(rho);
  if (std::filesystem::is_regular_file(name_or_path)) return load_scenario_file(name_or_path, rho);
  std::string names;
  for (const auto& n : builtin_scenarios()) names += (names.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown scenario '" + name_or_path + "'; valid names: " + names +
                              ", or a path to a scenario file");
}

ScenarioSpec parse_scenario_json(const std::string& text, double rho) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario file: ") + e.what());
  }
  try {
    const std::size_t K = doc.at("K").get<std::size_t>();
    const std::size_t d = doc.at("d").get<std::size_t>();
    const double r_max = doc.at("R_max").get<double>();
    const double a_max = doc.at("A_max").get<double>();
    const Vec b0 = doc.at("b0").get<Vec>();
    const double p_max = doc.value("P_max", 0.0);
    const double jitter = doc.value("jitter", 1e-6);
    const auto& items = doc.at("configs");
    if (items.size() != K) throw std::invalid_argument("scenario file: K does not match the config list");

    std::vector<ConfigDistribution> configs;
    for (const auto& c : items) {
      const std::string kind = c.at("kind").get<std::string>();
      if (kind == "gaussian_truncated") {
        configs.push_back(GaussianConfig{c.at("mu_r").get<double>(), c.at("sigma_r").get<double>(),
                                         c.at("mu_a").get<Vec>(), c.at("sigma_a").get<Vec>(),
                                         c.value("lower", 0.01)});
      } else if (kind == "uniform") {
        const Vec r = c.at("r").get<Vec>();
        if (r.size() != 2) throw std::invalid_argument("uniform config: r must be [lo, hi]");
        configs.push_back(UniformConfig{r[0], r[1], c.at("a_lo").get<Vec>(), c.at("a_hi").get<Vec>()});
      } else if (kind == "orthogonal_unit") {
        const Vec r = c.at("r").get<Vec>();
        if (r.size() != 2) throw std::invalid_argument("orthogonal config: r must be [lo, hi]");
        configs.push_back(OrthogonalUnitConfig{c.at("resource").get<std::size_t>(), r[0], r[1],
                                               c.value("noise", 0.0)});
      } else {
        throw std::invalid_argument("scenario file: unknown config kind '" + kind + "'");
      }
    }
    if (b0.size() != d) throw std::invalid_argument("scenario file: b0 must have d entries");
    return assemble(doc.value("name", std::string("custom")), std::move(configs), d, r_max, a_max, b0, rho,
                    p_max, jitter);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario file: ") + e.what());
  }
}

ScenarioSpec load_scenario_file(const std::filesystem::path& path, double rho) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_json(buf.str(), rho);
}

}  // namespace switchbid
