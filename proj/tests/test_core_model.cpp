#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "switchbid/core_model.hpp"

using namespace switchbid;

namespace {

SampleSet two_point_store() {
  SampleSet s(1);
  s.push({1.0, {0.5}});
  s.push({0.5, {1.0}});
  return s;
}

SampleSet random_store(Rng& rng, std::size_t n, std::size_t dim) {
  std::uniform_real_distribution<double> r(0.0, 2.0);
  std::uniform_real_distribution<double> a(0.0, 1.0);
  SampleSet s(dim);
  for (std::size_t j = 0; j < n; ++j) {
    RewardResourcePair p{r(rng), Vec(dim)};
    for (auto& x : p.consumption) x = a(rng);
    s.push(p);
  }
  return s;
}

Vec random_price(Rng& rng, std::size_t dim, double hi = 3.0) {
  std::uniform_real_distribution<double> u(0.0, hi);
  Vec p(dim);
  for (auto& x : p) x = u(rng);
  return p;
}

}  // namespace

TEST_CASE("empirical surplus matches the hinge mean") {
  auto s = two_point_store();
  CHECK(empirical_surplus(s, Vec{0.4}) == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(empirical_surplus(s, Vec{0.0}) == doctest::Approx(0.75));
  CHECK(empirical_surplus(SampleSet(1), Vec{0.3}) == 0.0);
  CHECK_THROWS_AS(empirical_surplus(s, Vec{0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("empirical consumption separates strict and weak ties") {
  auto s = two_point_store();
  auto h = empirical_consumption(s, Vec{0.4}, Threshold::strict);
  CHECK(h[0] == doctest::Approx(0.75));

  SampleSet tie(1);
  tie.push({0.2, {1.0}});
  CHECK(empirical_consumption(tie, Vec{0.2}, Threshold::strict)[0] == 0.0);
  CHECK(empirical_consumption(tie, Vec{0.2}, Threshold::weak)[0] == 1.0);

  CHECK_THROWS_AS(empirical_consumption(SampleSet(1), Vec{0.0}, Threshold::strict),
                  std::invalid_argument);
  CHECK_THROWS_AS(empirical_consumption(s, Vec{0.0, 1.0}, Threshold::weak), std::invalid_argument);
}

TEST_CASE("admission is strict with hard feasibility") {
  auto budget = BudgetState::make({10.0}, 100);
  CHECK(admit({1.0, {0.5}}, Vec{0.4}, budget) == Decision::accept);
  CHECK(budget.remaining[0] == doctest::Approx(9.5));

  CHECK(admit({0.2, {0.5}}, Vec{0.4}, budget) == Decision::reject);
  CHECK(budget.remaining[0] == doctest::Approx(9.5));

  auto tight = BudgetState::make({0.4}, 10);
  CHECK(admit({1.0, {0.5}}, Vec{0.0}, tight) == Decision::reject);
  CHECK(tight.remaining[0] == 0.4);
}

TEST_CASE("budget state derives the safe rate") {
  auto b = BudgetState::make({100.0, 50.0}, 100);
  const double eps = std::sqrt(std::log(100.0) / 100.0);
  CHECK(b.slack == doctest::Approx(eps));
  CHECK(b.per_period[0] == doctest::Approx(1.0));
  CHECK(b.safe_per_period[1] == doctest::Approx(0.5 * (1 - eps)));
  CHECK_THROWS(BudgetState::make({-1.0}, 10));
}

TEST_CASE("mixture validation and sampling") {
  CHECK_THROWS_AS(Mixture::from_weights({0.5, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(Mixture::from_weights({1.1, -0.1}), std::invalid_argument);
  auto w = Mixture::from_weights({0.25, 0.75 + 1e-12});
  CHECK(w[0] + w[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(Mixture::from_weights({0.3, 0.3, 0.4}).argmax() == 2);
  CHECK(Mixture::from_weights({0.5, 0.5}).argmax() == 0);
  Rng rng(3);
  auto one = Mixture::one_hot(3, 1);
  for (int i = 0; i < 100; ++i) CHECK(one.sample(rng) == 1);
}

TEST_CASE("pathwise surplus inequality holds on fuzzed triples") {
  Rng rng(11);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int k = 0; k < 10000; ++k) {
    const std::size_t d = 1 + k % 3;
    const double r = u(rng);
    Vec a(d), p(d);
    for (auto& x : a) x = u(rng);
    for (auto& x : p) x = u(rng);
    const double pa = dot(p, a);
    for (int x = 0; x <= 1; ++x) {
      REQUIRE(r * x <= pa * x + std::max(0.0, r - pa) + 1e-12);
    }
  }
}

TEST_CASE("surplus is nonincreasing and convex in price") {
  Rng rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + trial % 3;
    auto s = random_store(rng, 20, d);
    auto p = random_price(rng, d);
    const double base = empirical_surplus(s, p);
    for (std::size_t i = 0; i < d; ++i) {
      auto q = p;
      q[i] += 0.1 + unit(rng);
      REQUIRE(empirical_surplus(s, q) <= base + 1e-12);
    }
    auto p2 = random_price(rng, d);
    const double lam = unit(rng);
    Vec mid(d);
    for (std::size_t i = 0; i < d; ++i) mid[i] = lam * p[i] + (1 - lam) * p2[i];
    REQUIRE(empirical_surplus(s, mid) <=
            lam * base + (1 - lam) * empirical_surplus(s, p2) + 1e-9);
  }
}

TEST_CASE("strict consumption never exceeds weak consumption") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + trial % 3;
    auto s = random_store(rng, 100, d);
    auto p = random_price(rng, d);
    auto strict = empirical_consumption(s, p, Threshold::strict);
    auto weak = empirical_consumption(s, p, Threshold::weak);
    for (std::size_t i = 0; i < d; ++i) REQUIRE(strict[i] <= weak[i]);
  }
}

TEST_CASE("remaining budget stays nonnegative under random admissions") {
  Rng rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    auto budget = BudgetState::make({5.0, 3.0}, 50);
    Vec used(2, 0.0);
    for (int t = 0; t < 200; ++t) {
      RewardResourcePair pair{u(rng), {u(rng), u(rng)}};
      Vec p{u(rng) * 0.2, u(rng) * 0.2};
      if (admit(pair, p, budget) == Decision::accept) {
        used[0] += pair.consumption[0];
        used[1] += pair.consumption[1];
      }
      REQUIRE(budget.remaining[0] >= 0.0);
      REQUIRE(budget.remaining[1] >= 0.0);
    }
    CHECK(used[0] <= 5.0 + 1e-9);
    CHECK(used[1] <= 3.0 + 1e-9);
  }
}
