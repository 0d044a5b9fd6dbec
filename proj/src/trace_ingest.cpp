#include "switchbid/trace_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace switchbid {

namespace {

constexpr std::size_t kColumns = 9;
constexpr std::size_t kStartTime = 5;
constexpr std::size_t kPlanCpu = 7;
constexpr std::size_t kPlanMem = 8;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

}  // namespace

TraceParseResult parse_trace(const std::filesystem::path& path, std::size_t limit) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());

  TraceParseResult result;
  std::string line;
  std::array<std::string_view, kColumns> fields;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::string_view rest(line);
    std::size_t n = 0;
    bool overflow = false;
    while (true) {
      const auto comma = rest.find(',');
      if (n == kColumns) {
        overflow = true;
        break;
      }
      fields[n++] = rest.substr(0, comma);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    const auto start = n == kColumns && !overflow ? parse_number<std::int64_t>(fields[kStartTime]) : std::nullopt;
    if (!start) {
      ++result.malformed;
      continue;
    }
    const auto cpu = parse_number<double>(fields[kPlanCpu]);
    const auto mem = parse_number<double>(fields[kPlanMem]);
    if (!cpu || !mem || !(*cpu > 0.0) || !(*mem > 0.0)) {
      ++result.dropped;
      continue;
    }
    result.arrivals.push_back({*cpu / 100.0, *mem / 100.0, *start, row++});
  }

  std::stable_sort(result.arrivals.begin(), result.arrivals.end(),
                   [](const TraceArrival& a, const TraceArrival& b) { return a.start_time < b.start_time; });
  if (result.arrivals.size() < limit) {
    throw std::runtime_error("trace " + path.string() + " has " + std::to_string(result.arrivals.size()) +
                             " valid rows, " + std::to_string(limit - result.arrivals.size()) +
                             " short of the requested " + std::to_string(limit));
  }
  result.arrivals.resize(limit);
  return result;
}

double construct_reward(const TraceArrival& arrival, std::size_t regime, const RegimeTable& regimes,
                        double sigma, Rng& rng) {
  if (regime >= regimes.size()) throw std::out_of_range("unknown regime " + std::to_string(regime));
  const auto& c = regimes.coefficients[regime];
  double noise = 0.0;
  if (sigma > 0.0) noise = std::normal_distribution<double>(0.0, sigma)(rng);
  return std::max(0.0, c[0] * arrival.cpu + c[1] * arrival.mem + noise);
}

TraceArrivals::TraceArrivals(std::shared_ptr<const std::vector<TraceArrival>> arrivals, RegimeTable regimes,
                             double sigma, double reward_max)
    : arrivals_(std::move(arrivals)), regimes_(std::move(regimes)), sigma_(sigma), reward_max_(reward_max) {
  if (!arrivals_ || arrivals_->empty()) throw std::invalid_argument("trace scenario needs arrivals");
  if (sigma_ < 0.0) throw std::invalid_argument("sigma must be nonnegative");
}

RewardResourcePair TraceArrivals::make(const TraceArrival& a, std::size_t config, Rng& rng) const {
  // The 6 sigma headroom in R_max makes the upper clip a formality.
  const double r = std::min(reward_max_, construct_reward(a, config, regimes_, sigma_, rng));
  return {r, {a.cpu, a.mem}};
}

RewardResourcePair TraceArrivals::draw(std::size_t config, std::size_t round, Rng& rng) const {
  return make(arrivals_->at(round), config, rng);
}

RewardResourcePair TraceArrivals::draw_stationary(std::size_t config, Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, arrivals_->size() - 1);
  return make((*arrivals_)[pick(rng)], config, rng);
}

ScenarioSpec trace_scenario(std::vector<TraceArrival> arrivals, const RegimeTable& regimes, double sigma,
                            double rho) {
  if (arrivals.empty()) throw std::invalid_argument("trace scenario needs arrivals");
  if (regimes.size() == 0) throw std::invalid_argument("trace scenario needs at least one regime");
  if (!(rho >= 0.0)) throw std::invalid_argument("rho must be nonnegative");
  double max_cpu = 0.0, max_mem = 0.0;
  Vec mean(2, 0.0);
  for (const auto& a : arrivals) {
    max_cpu = std::max(max_cpu, a.cpu);
    max_mem = std::max(max_mem, a.mem);
    mean[0] += a.cpu;
    mean[1] += a.mem;
  }
  for (double& m : mean) m /= static_cast<double>(arrivals.size());

  ScenarioSpec s;
  s.name = "trace";
  s.num_configs = regimes.size();
  s.dim = 2;
  s.reward_max = 2.0 * max_cpu + 2.0 * max_mem + 6.0 * sigma;
  s.consumption_max = std::max(max_cpu, max_mem);
  s.baseline_budget = {0.5 * mean[0], 0.5 * mean[1]};
  s.rho = rho;
  s.budget = {rho * s.baseline_budget[0], rho * s.baseline_budget[1]};
  s.price_max = default_price_max(s.reward_max, rho > 0.0 ? s.budget : s.baseline_budget);
  auto shared = std::make_shared<const std::vector<TraceArrival>>(std::move(arrivals));
  s.arrivals = std::make_shared<TraceArrivals>(std::move(shared), regimes, sigma, s.reward_max);
  s.validate();
  return s;
}

}  // namespace switchbid
