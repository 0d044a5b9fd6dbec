#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "switchbid/policy.hpp"
#include "switchbid/trace_ingest.hpp"

using namespace switchbid;

namespace {

const std::filesystem::path kFixture = std::filesystem::path(SWITCHBID_TEST_DATA) / "batch_task_fixture.csv";

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_CASE("fixture parses with drops and malformed rows counted") {
  auto parsed = parse_trace(kFixture, 195);
  CHECK(parsed.arrivals.size() == 195);
  CHECK(parsed.dropped == 3);
  CHECK(parsed.malformed == 2);
  for (std::size_t i = 1; i < parsed.arrivals.size(); ++i) {
    REQUIRE(parsed.arrivals[i - 1].start_time <= parsed.arrivals[i].start_time);
  }
  for (const auto& a : parsed.arrivals) {
    REQUIRE(a.cpu > 0.0);
    REQUIRE(a.mem > 0.0);
  }
  auto again = parse_trace(kFixture, 195);
  for (std::size_t i = 0; i < 195; ++i) {
    REQUIRE(again.arrivals[i].cpu == parsed.arrivals[i].cpu);
    REQUIRE(again.arrivals[i].mem == parsed.arrivals[i].mem);
    REQUIRE(again.arrivals[i].order_index == parsed.arrivals[i].order_index);
  }
  CHECK(parse_trace(kFixture, 50).arrivals.size() == 50);
}

TEST_CASE("trace shortfall and missing file are errors") {
  CHECK_THROWS_AS(parse_trace(kFixture, 196), std::runtime_error);
  try {
    parse_trace(kFixture, 200);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("5 short") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_trace("/nonexistent/batch_task.csv", 1), std::runtime_error);
}

TEST_CASE("normalization, validity and ordering") {
  auto path = write_temp("switchbid_trace_small.csv",
                         "t1,1,j1,1,Terminated,50,60,100,50\n"
                         "t2,1,j1,1,Terminated,10,60,200,\n"
                         "t3,1,j1,1,Terminated,30,60,50,25\n"
                         "t4,1,j1,1,Terminated,20,60,300,75\n"
                         "t5,1,j1,1,Terminated,90,95,10,10\n"
                         "t6,1,j1,1,Terminated,70,95,20,20\n"
                         "t7,1,j1,1,Terminated,80,95,30,30\n"
                         "t8,1,j1,1,Terminated,60,95,40,40\n"
                         "t9,1,j1,1,Terminated,40,95,60,60\n"
                         "t10,1,j1,1,Terminated,30,95,70,70\n");
  auto parsed = parse_trace(path, 9);
  CHECK(parsed.dropped == 1);
  std::vector<std::int64_t> starts;
  for (const auto& a : parsed.arrivals) starts.push_back(a.start_time);
  CHECK(starts == std::vector<std::int64_t>{20, 30, 30, 40, 50, 60, 70, 80, 90});
  // Equal start times keep file order.
  CHECK(parsed.arrivals[1].cpu == doctest::Approx(0.5));
  CHECK(parsed.arrivals[2].cpu == doctest::Approx(0.7));
  CHECK(parsed.arrivals[4].cpu == doctest::Approx(1.0));
  CHECK(parsed.arrivals[4].mem == doctest::Approx(0.5));
  std::filesystem::remove(path);
}

TEST_CASE("regime rewards") {
  RegimeTable regimes;
  Rng rng(1);
  CHECK(construct_reward({1.0, 0.5}, 0, regimes, 0.0, rng) == doctest::Approx(2.25));
  CHECK(construct_reward({0.0, 1.0}, 1, regimes, 0.0, rng) == doctest::Approx(2.0));
  CHECK_THROWS_AS(construct_reward({1.0, 1.0}, 3, regimes, 0.1, rng), std::out_of_range);

  const TraceArrival a{0.7, 0.4};
  double mean = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) mean += construct_reward(a, 2, regimes, 0.1, rng) / n;
  CHECK(std::abs(mean - 1.2 * (0.7 + 0.4)) <= 0.01);

  for (int i = 0; i < 10000; ++i) REQUIRE(construct_reward({0.001, 0.001}, 0, regimes, 0.1, rng) >= 0.0);
}

TEST_CASE("trace scenario budget and bounds") {
  std::vector<TraceArrival> arrivals(5000, TraceArrival{0.836, 0.349});
  auto s = trace_scenario(arrivals, RegimeTable{}, 0.1, 1.0);
  auto B = s.total_budget(5000);
  CHECK(B[0] == doctest::Approx(2090.0));
  CHECK(B[1] == doctest::Approx(872.5));
  CHECK(s.num_configs == 3);
  CHECK(s.reward_max == doctest::Approx(2.0 * 0.836 + 2.0 * 0.349 + 0.6));
  CHECK(s.consumption_max == doctest::Approx(0.836));
  CHECK(s.arrivals->max_horizon() == 5000);
}

TEST_CASE("replay serves the same arrival under every regime") {
  auto parsed = parse_trace(kFixture, 195);
  auto s = trace_scenario(parsed.arrivals, RegimeTable{}, 0.1, 1.0);
  Rng rng(3);
  for (std::size_t t = 0; t < 195; ++t) {
    auto x = s.arrivals->draw(0, t, rng);
    auto y = s.arrivals->draw(1, t, rng);
    REQUIRE(x.consumption == y.consumption);
    REQUIRE(x.consumption[0] == parsed.arrivals[t].cpu);
    REQUIRE(x.reward >= 0.0);
    REQUIRE(x.reward <= s.reward_max);
  }
}

TEST_CASE("zero budget on the trace earns nothing") {
  auto parsed = parse_trace(kFixture, 195);
  auto s = trace_scenario(parsed.arrivals, RegimeTable{}, 0.1, 0.0);
  SaddleSolution oracle;
  oracle.weights = Mixture::uniform(3);
  oracle.price = {0.0, 0.0};
  for (auto kind : all_policy_kinds()) {
    Rng rng(4);
    auto rec = run_policy(kind, s, 195, PolicyParams{}, rng, &oracle);
    CHECK(rec.total_reward == 0.0);
  }
}

TEST_CASE("policies run on the fixture within budget") {
  auto parsed = parse_trace(kFixture, 195);
  auto s = trace_scenario(parsed.arrivals, RegimeTable{}, 0.1, 1.0);
  Rng orng(5);
  auto oracle = v_mix(s, s.budget, 2000, orng);
  CHECK(oracle.value > 0.0);
  for (auto kind : all_policy_kinds()) {
    Rng rng(6);
    PolicyParams params;
    params.alpha = 0.01;
    auto rec = run_policy(kind, s, 195, params, rng, &oracle.saddle);
    for (double r : rec.budget.remaining) CHECK(r >= 0.0);
    CHECK(rec.total_reward <= 195.0 * s.reward_max);
  }
  Rng rng(7);
  CHECK_THROWS_AS(run_spucb(s, 196, PolicyParams{}, rng), std::invalid_argument);
}
