#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "switchbid/fluid_oracle.hpp"
#include "switchbid/scenarios.hpp"

using namespace switchbid;

namespace {

bool in_bounds(const RewardResourcePair& p, const ScenarioSpec& s) {
  if (p.reward < 0.0 || p.reward > s.reward_max) return false;
  for (double a : p.consumption) {
    if (a < 0.0 || a > s.consumption_max) return false;
  }
  return p.consumption.size() == s.dim;
}

}  // namespace

TEST_CASE("s0 table and truncation contract") {
  auto s = make_s0(0.7);
  CHECK(s.num_configs == 5);
  CHECK(s.dim == 3);
  CHECK(s.reward_max == 2.0);
  CHECK(s.consumption_max == 2.0);
  CHECK(s.budget[0] == doctest::Approx(0.56));
  CHECK(s.budget[1] == doctest::Approx(0.14));

  auto* model = dynamic_cast<const SyntheticArrivals*>(s.arrivals.get());
  REQUIRE(model != nullptr);
  const auto& g0 = std::get<GaussianConfig>(model->configs()[0]);
  CHECK(g0.mu_r == 1.0);
  CHECK(g0.sigma_r == 0.3);

  Rng rng(1);
  for (std::size_t k = 0; k < 5; ++k) {
    Vec mean(3, 0.0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      auto p = s.arrivals->draw(k, 0, rng);
      REQUIRE(p.reward >= 0.01);
      REQUIRE(p.reward <= 2.0);
      for (std::size_t j = 0; j < 3; ++j) {
        REQUIRE(p.consumption[j] >= 0.01);
        REQUIRE(p.consumption[j] <= 2.0);
        mean[j] += p.consumption[j] / n;
      }
    }
    if (k == 4) {
      for (double m : mean) CHECK(std::abs(m - 0.1) <= 0.15);
    }
  }
}

TEST_CASE("truncated normal gives up after the attempt cap") {
  Rng rng(2);
  CHECK_THROWS_AS(truncated_normal(0.0, 0.01, 5.0, 6.0, rng), std::runtime_error);
  const double x = truncated_normal(0.0, 1.0, -0.5, 0.5, rng);
  CHECK(std::abs(x) <= 0.5);
}

TEST_CASE("s4 budget and noise bounds") {
  auto s = make_s4(0.7);
  CHECK(s.budget[0] == doctest::Approx(0.35));
  CHECK(s.budget[1] == doctest::Approx(0.35));
  Rng rng(3);
  for (int i = 0; i < 20000; ++i) {
    const std::size_t k = i % 2;
    auto p = s.arrivals->draw(k, 0, rng);
    REQUIRE(p.reward >= 0.99);
    REQUIRE(p.reward <= 1.01);
    REQUIRE(p.consumption[k] >= 0.99);
    REQUIRE(p.consumption[1 - k] >= 0.0);
    REQUIRE(p.consumption[1 - k] <= 0.01);
  }
}

TEST_CASE("s4 mixed value doubles the fixed value") {
  auto s = make_s4(1.0);
  Rng rng(4);
  const double mix = v_mix(s, s.budget, 5000, rng).value;
  CHECK(std::abs(mix - 1.0) <= 0.02);
  const double fixed = v_fixed(s, s.budget, 200, 20, rng) / 200.0;
  CHECK(std::abs(fixed - 0.5) <= 0.02);
  CHECK(mix / fixed == doctest::Approx(2.0).epsilon(0.05));

  auto s7 = make_s4(0.7);
  CHECK(std::abs(v_mix(s7, s7.budget, 5000, rng).value - 0.70) <= 0.02);
  CHECK(std::abs(v_fixed(s7, s7.budget, 100, 20, rng) - 35.0) <= 1.0);
}

TEST_CASE("example1 rewards pass a Kolmogorov-Smirnov check") {
  auto s = make_example1();
  Rng rng(5);
  const int n = 10000;
  Vec r(n);
  for (int i = 0; i < n; ++i) r[i] = s.arrivals->draw(i % 2, 0, rng).reward;
  std::sort(r.begin(), r.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = r[i] / 2.0;
    ks = std::max({ks, std::abs((i + 1.0) / n - cdf), std::abs(static_cast<double>(i) / n - cdf)});
  }
  CHECK(ks < 0.02);
}

TEST_CASE("example1 oracle values") {
  auto s = make_example1();
  Rng rng(6);
  CHECK(std::abs(100.0 * v_mix(s, s.budget, 10000, rng).value - 100.0) <= 2.0);
  CHECK(std::abs(v_fixed(s, s.budget, 100, 300, rng) - 74.75) <= 0.7);
}

TEST_CASE("clip and jitter") {
  Rng rng(7);
  const double eta = 1e-6;
  auto hi = clip_and_jitter(15.0, {3.0, -1.0}, 10.0, 2.0, eta, rng);
  CHECK(hi.reward <= 10.0);
  CHECK(hi.reward >= 10.0 - eta);
  CHECK(hi.consumption[0] == 2.0);
  CHECK(hi.consumption[1] == 0.0);
  CHECK(clip_and_jitter(5.0, {1.0}, 10.0, 2.0, 0.0, rng).reward == 5.0);

  const int n = 1000000;
  Vec r(n);
  for (int i = 0; i < n; ++i) r[i] = clip_and_jitter(5.0, {}, 10.0, 2.0, eta, rng).reward;
  std::sort(r.begin(), r.end());
  const auto distinct = static_cast<double>(std::unique(r.begin(), r.end()) - r.begin());
  CHECK((n - distinct) / n < 1e-3);
}

TEST_CASE("generators are deterministic per seed") {
  for (const auto& name : builtin_scenarios()) {
    auto s = make_scenario(name, 0.7);
    Rng a(9), b(9);
    for (int i = 0; i < 200; ++i) {
      auto x = s.arrivals->draw(i % s.num_configs, 0, a);
      auto y = s.arrivals->draw(i % s.num_configs, 0, b);
      REQUIRE(x.reward == y.reward);
      REQUIRE(x.consumption == y.consumption);
      REQUIRE(in_bounds(x, s));
    }
  }
}

TEST_CASE("unknown scenario lists valid names") {
  try {
    make_scenario("s9", 1.0);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("s0, s4, example1") != std::string::npos);
  }
}

TEST_CASE("scenario files cover every distribution kind") {
  const std::string doc = R"({
    "name": "mixed", "K": 3, "d": 2, "R_max": 3.0, "A_max": 1.5, "b0": [0.4, 0.4],
    "configs": [
      {"kind": "gaussian_truncated", "mu_r": 1.0, "sigma_r": 0.2, "mu_a": [0.5, 0.1], "sigma_a": [0.1, 0.1]},
      {"kind": "uniform", "r": [0.5, 4.0], "a_lo": [0.0, 0.2], "a_hi": [0.3, 2.0]},
      {"kind": "orthogonal_unit", "resource": 1, "r": [1.0, 2.0], "noise": 0.05}
    ]})";
  auto s = parse_scenario_json(doc, 0.5);
  CHECK(s.name == "mixed");
  CHECK(s.budget[1] == doctest::Approx(0.2));
  CHECK(s.price_max == doctest::Approx(2.0 * 3.0 / 0.2));
  Rng rng(10);
  for (int i = 0; i < 3000; ++i) REQUIRE(in_bounds(s.arrivals->draw(i % 3, 0, rng), s));

  const auto path = std::filesystem::temp_directory_path() / "switchbid_scenario_test.json";
  std::ofstream(path) << doc;
  CHECK(make_scenario(path.string(), 1.0).num_configs == 3);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(parse_scenario_json(R"({"K": 1})", 1.0), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_json("not json", 1.0), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_json(R"({"K": 1, "d": 1, "R_max": 1, "A_max": 1, "b0": [1],
      "configs": [{"kind": "poisson"}]})", 1.0), std::invalid_argument);
}
