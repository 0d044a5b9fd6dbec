#pragma once

// Independent reference oracles used by the test suites and `validate`.
// Nothing here calls into the simplex.

#include <cstddef>
#include <optional>

#include "switchbid/core_model.hpp"
#include "switchbid/lp_solver.hpp"

namespace switchbid::reference {

/// Minimum of c.x over every basic feasible point of `lp`, found by solving
/// each n-subset of active constraints (rows and variable bounds) with
/// Gaussian elimination. Exponential; meant for n <= 5 and a handful of rows.
/// Returns nullopt when no feasible vertex exists.
std::optional<double> vertex_enumeration_minimum(const lp::LinearProgram& lp,
                                                 double feas_tol = 1e-9);

/// Random LP with box bounds [0, 10] on every variable and mixed row senses,
/// built around an interior point so the feasible region is nonempty.
lp::LinearProgram random_bounded_lp(Rng& rng, std::size_t num_vars, std::size_t num_rows);

}  // namespace switchbid::reference
