#include <algorithm>

#include "doctest.h"
#include "switchbid/validate.hpp"

using namespace switchbid;

namespace {

const PropertyResult* find(const ValidateReport& r, const std::string& name) {
  auto it = std::find_if(r.results.begin(), r.results.end(), [&](const auto& p) { return p.name == name; });
  return it == r.results.end() ? nullptr : &*it;
}

}  // namespace

TEST_CASE("every property passes on a clean build") {
  std::vector<std::string> seen;
  auto report = run_validation({}, [&](const PropertyResult& r) { seen.push_back(r.name); });
  CHECK(seen == property_names());
  for (const auto& r : report.results) {
    INFO(r.name << ": " << r.detail);
    CHECK(r.passed);
    CHECK(r.cases > 0);
  }
  CHECK(report.all_passed());
}

TEST_CASE("weak admission is caught by tie separation only") {
  ValidateOptions opt;
  opt.admission = Threshold::weak;
  opt.filter = "s";
  auto report = run_validation(opt);
  const auto* ties = find(report, "tie_separation");
  const auto* surplus = find(report, "surplus_inequality");
  REQUIRE(ties);
  REQUIRE(surplus);
  CHECK_FALSE(ties->passed);
  CHECK(surplus->passed);
  CHECK(find(report, "budget_feasibility")->passed);
  CHECK_FALSE(report.all_passed());
}

TEST_CASE("filter selects by substring") {
  ValidateOptions opt;
  opt.filter = "no_such_property";
  auto none = run_validation(opt);
  CHECK(none.results.empty());
  CHECK(none.all_passed());
  opt.filter = "separation";
  auto one = run_validation(opt);
  REQUIRE(one.results.size() == 1);
  CHECK(one.results[0].name == "tie_separation");
}

TEST_CASE("a filtered property sees the same stream as in a full run") {
  ValidateOptions opt;
  opt.filter = "mixture_sampling";
  auto a = run_validation(opt);
  auto b = run_validation(opt);
  REQUIRE(a.results.size() == 1);
  CHECK(a.results[0].detail == b.results[0].detail);
  CHECK(a.results[0].cases == b.results[0].cases);
}
