#include <cmath>

#include "doctest.h"
#include "switchbid/lp_solver.hpp"
#include "switchbid/reference.hpp"

using namespace switchbid;
using lp::LinearProgram;
using lp::Sense;
using lp::Status;

namespace {

void check_certificate(const LinearProgram& prog, const lp::LpSolution& sol) {
  auto cert = lp::certify(prog, sol);
  CHECK(cert.max_primal_violation <= 1e-7);
  CHECK(cert.max_dual_sign_violation <= 1e-7);
  CHECK(cert.max_complementarity <= 1e-6);
  CHECK(cert.duality_gap <= 1e-6 * (1.0 + std::abs(sol.objective_value)));
}

}  // namespace

TEST_CASE("single >= row reports its multiplier") {
  LinearProgram prog(1);
  prog.objective = {1.0};
  prog.add_row(std::vector<double>{1.0}, Sense::greater_equal, 1.0);
  auto sol = lp::solve(prog);
  REQUIRE(sol.status == Status::optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0));
  CHECK(sol.objective_value == doctest::Approx(1.0));
  CHECK(sol.duals[0] == doctest::Approx(1.0));
  check_certificate(prog, sol);
}

TEST_CASE("boundary optimum at the origin") {
  LinearProgram prog(1);
  prog.objective = {-1.0};
  prog.add_row(std::vector<double>{1.0}, Sense::less_equal, 0.0);
  auto sol = lp::solve(prog);
  REQUIRE(sol.status == Status::optimal);
  CHECK(sol.x[0] == doctest::Approx(0.0));
  CHECK(sol.objective_value == doctest::Approx(0.0));
}

TEST_CASE("infeasible and unbounded programs") {
  LinearProgram infeasible(1);
  infeasible.objective = {1.0};
  infeasible.add_row(std::vector<double>{1.0}, Sense::less_equal, -1.0);
  auto sol = lp::solve(infeasible);
  CHECK(sol.status == Status::infeasible);
  CHECK(sol.x.empty());

  LinearProgram unbounded(2);
  unbounded.objective = {-1.0, 0.0};
  unbounded.add_row(std::vector<double>{1.0, -1.0}, Sense::less_equal, 1.0);
  auto u = lp::solve(unbounded);
  CHECK(u.status == Status::unbounded);
  CHECK(u.duals.empty());
}

TEST_CASE("dimension errors surface before solving") {
  LinearProgram prog(2);
  CHECK_THROWS_AS(prog.add_row(std::vector<double>{1.0}, Sense::equal, 1.0), std::invalid_argument);
  prog.rhs.push_back(1.0);
  CHECK_THROWS_AS(lp::solve(prog), std::invalid_argument);

  LinearProgram bad_bounds(1);
  bad_bounds.upper[0] = -1.0;
  CHECK_THROWS_AS(lp::solve(bad_bounds), std::invalid_argument);
}

TEST_CASE("equality rows and upper bounds") {
  // minimize -x - 2y  s.t. x + y = 3, y <= 2 (bound), x <= 5 (bound)
  LinearProgram prog(2);
  prog.objective = {-1.0, -2.0};
  prog.upper = {5.0, 2.0};
  prog.add_row(std::vector<double>{1.0, 1.0}, Sense::equal, 3.0);
  auto sol = lp::solve(prog);
  REQUIRE(sol.status == Status::optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0));
  CHECK(sol.x[1] == doctest::Approx(2.0));
  CHECK(sol.objective_value == doctest::Approx(-5.0));
  CHECK(sol.duals[0] == doctest::Approx(-1.0));
  check_certificate(prog, sol);
}

TEST_CASE("nonzero lower bounds shift correctly") {
  LinearProgram prog(2);
  prog.objective = {1.0, 1.0};
  prog.lower = {2.0, -1.0};
  prog.add_row(std::vector<double>{1.0, 1.0}, Sense::greater_equal, 0.0);
  auto sol = lp::solve(prog);
  REQUIRE(sol.status == Status::optimal);
  CHECK(sol.objective_value == doctest::Approx(1.0));
  check_certificate(prog, sol);
}

TEST_CASE("fractional knapsack with unit weights picks the top rewards") {
  // maximize sum r_t x_t s.t. sum x_t <= 3, x in [0,1]^6
  const std::vector<double> r{0.3, 1.7, 0.9, 1.2, 0.1, 1.9};
  LinearProgram prog(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    prog.objective[j] = -r[j];
    prog.upper[j] = 1.0;
  }
  prog.add_row(std::vector<double>(r.size(), 1.0), Sense::less_equal, 3.0);
  auto sol = lp::solve(prog);
  REQUIRE(sol.status == Status::optimal);
  CHECK(-sol.objective_value == doctest::Approx(1.9 + 1.7 + 1.2));
  check_certificate(prog, sol);
}

TEST_CASE("degenerate program terminates") {
  // Many redundant constraints through the optimum vertex.
  LinearProgram prog(2);
  prog.objective = {-1.0, -1.0};
  for (int k = 0; k < 30; ++k) {
    const double t = 0.05 * k;
    prog.add_row(std::vector<double>{1.0 + t, 1.0 - t / 2}, Sense::less_equal, 2.0 + t / 2);
  }
  auto sol = lp::solve(prog);
  REQUIRE(sol.status == Status::optimal);
  CHECK(sol.objective_value == doctest::Approx(-2.0));
  check_certificate(prog, sol);
}

TEST_CASE("iteration cap raises solver_stalled") {
  LinearProgram prog(3);
  prog.objective = {-1.0, -1.0, -1.0};
  prog.add_row(std::vector<double>{1.0, 2.0, 3.0}, Sense::less_equal, 4.0);
  prog.add_row(std::vector<double>{3.0, 1.0, 1.0}, Sense::less_equal, 4.0);
  lp::SolverOptions opt;
  opt.max_iterations = 1;
  CHECK_THROWS_AS(lp::solve(prog, opt), lp::SolverStalled);
}

TEST_CASE("solver is deterministic") {
  Rng rng(17);
  auto prog = reference::random_bounded_lp(rng, 5, 8);
  auto a = lp::solve(prog);
  auto b = lp::solve(prog);
  CHECK(a.x == b.x);
  CHECK(a.duals == b.duals);
}

TEST_CASE("random small programs match vertex enumeration") {
  Rng rng(2024);
  std::uniform_int_distribution<std::size_t> nv(1, 4), nr(1, 6);
  for (int trial = 0; trial < 300; ++trial) {
    auto prog = reference::random_bounded_lp(rng, trial % 3 == 0 ? 4 : nv(rng), trial % 3 == 0 ? 6 : nr(rng));
    auto sol = lp::solve(prog);
    auto oracle = reference::vertex_enumeration_minimum(prog);
    REQUIRE(oracle.has_value());
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.objective_value == doctest::Approx(*oracle).epsilon(1e-6).scale(1.0));
    check_certificate(prog, sol);
  }
}
