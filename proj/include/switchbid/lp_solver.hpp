#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace switchbid::lp {

using Vec = std::vector<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { less_equal, greater_equal, equal };

/// minimize c.x  subject to  A x (<=|>=|=) rhs,  lower <= x <= upper.
/// The constraint matrix is dense and row-major. Lower bounds must be finite;
/// upper bounds default to +infinity.
struct LinearProgram {
  Vec objective;
  std::vector<double> matrix;
  Vec rhs;
  std::vector<Sense> senses;
  Vec lower;
  Vec upper;

  LinearProgram() = default;
  explicit LinearProgram(std::size_t num_vars)
      : objective(num_vars, 0.0), lower(num_vars, 0.0), upper(num_vars, kInfinity) {}

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return rhs.size(); }

  double coeff(std::size_t row, std::size_t col) const { return matrix[row * num_vars() + col]; }

  /// Appends a dense row; returns its index.
  std::size_t add_row(std::span<const double> coeffs, Sense sense, double rhs_value);
  /// Appends a row given as (column, coefficient) pairs.
  std::size_t add_sparse_row(std::span<const std::pair<std::size_t, double>> entries, Sense sense,
                             double rhs_value);

  /// Throws std::invalid_argument when the sizes disagree or a bound is bad.
  void validate() const;
};

enum class Status { optimal, infeasible, unbounded };

const char* to_string(Status s);

/// Duals follow the minimization convention: >= rows carry nonnegative
/// multipliers, <= rows nonpositive, = rows are free. At an optimum
/// c.x = rhs.duals + sum_j reduced_costs[j] * x[j].
struct LpSolution {
  Status status = Status::infeasible;
  Vec x;
  Vec duals;
  Vec reduced_costs;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
};

struct SolverOptions {
  double pivot_tol = 1e-11;
  double optimality_tol = 1e-9;
  double feasibility_tol = 1e-9;
  /// Post-solve primal residual allowed before the result is rejected.
  double residual_tol = 1e-7;
  /// 0 selects 50 * (rows + cols) + 1000.
  std::size_t max_iterations = 0;
  /// Consecutive degenerate Dantzig pivots before switching to Bland's rule
  /// for the rest of the solve.
  std::size_t degenerate_streak_limit = 50;
};

/// Raised when the simplex hits its iteration cap or its final iterate fails
/// the residual check. Never returned as a silent status.
class SolverStalled : public std::runtime_error {
 public:
  explicit SolverStalled(const std::string& what) : std::runtime_error("solver_stalled: " + what) {}
};

/// Bounded-variable two-phase primal simplex on a dense tableau.
LpSolution solve(const LinearProgram& lp, const SolverOptions& options = {});

/// Residual summaries used by tests and the validation suite.
struct Certificate {
  double max_primal_violation = 0.0;
  double max_dual_sign_violation = 0.0;
  double max_complementarity = 0.0;  // max_i |dual_i * slack_i| / (1 + |rhs_i|)
  double duality_gap = 0.0;          // |c.x - (rhs.y + sum_j d_j x_j)|
};

Certificate certify(const LinearProgram& lp, const LpSolution& sol);

}  // namespace switchbid::lp
