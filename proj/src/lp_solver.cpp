#include "switchbid/lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace switchbid::lp {

std::size_t LinearProgram::add_row(std::span<const double> coeffs, Sense sense, double rhs_value) {
  if (coeffs.size() != num_vars()) {
    throw std::invalid_argument("add_row: row has " + std::to_string(coeffs.size()) +
                                " coefficients for " + std::to_string(num_vars()) + " variables");
  }
  matrix.insert(matrix.end(), coeffs.begin(), coeffs.end());
  rhs.push_back(rhs_value);
  senses.push_back(sense);
  return rhs.size() - 1;
}

std::size_t LinearProgram::add_sparse_row(std::span<const std::pair<std::size_t, double>> entries,
                                          Sense sense, double rhs_value) {
  const std::size_t base = matrix.size();
  matrix.resize(base + num_vars(), 0.0);
  for (auto [col, value] : entries) {
    if (col >= num_vars()) throw std::invalid_argument("add_sparse_row: column out of range");
    matrix[base + col] += value;
  }
  rhs.push_back(rhs_value);
  senses.push_back(sense);
  return rhs.size() - 1;
}

void LinearProgram::validate() const {
  const std::size_t n = num_vars();
  const std::size_t m = num_rows();
  if (matrix.size() != m * n) {
    throw std::invalid_argument("linear program: matrix has " + std::to_string(matrix.size()) +
                                " entries, expected " + std::to_string(m) + "x" + std::to_string(n));
  }
  if (senses.size() != m) throw std::invalid_argument("linear program: senses/rhs size mismatch");
  if (lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("linear program: bound vectors do not match objective size");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(lower[j])) throw std::invalid_argument("linear program: lower bounds must be finite");
    if (std::isnan(upper[j]) || upper[j] < lower[j]) {
      throw std::invalid_argument("linear program: upper bound below lower bound");
    }
    if (!std::isfinite(objective[j])) throw std::invalid_argument("linear program: non-finite cost");
  }
  for (double v : matrix) {
    if (!std::isfinite(v)) throw std::invalid_argument("linear program: non-finite coefficient");
  }
  for (double v : rhs) {
    if (!std::isfinite(v)) throw std::invalid_argument("linear program: non-finite rhs");
  }
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Tableau over shifted variables x' = x - lower, so every column lives in
// [0, cap]. Columns: structural, then one slack/surplus per inequality row,
// then one artificial per >=/= row (after rhs normalization).
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SolverOptions& opt)
      : lp_(lp), opt_(opt), m_(lp.num_rows()), n_(lp.num_vars()) {
    build();
  }

  LpSolution run() {
    LpSolution sol;
    const std::size_t cap = opt_.max_iterations ? opt_.max_iterations : 50 * (m_ + cols_) + 1000;
    max_iterations_ = cap;

    if (has_artificials_) {
      set_phase_costs(/*phase_one=*/true);
      if (iterate(/*phase_one=*/true) == Outcome::unbounded) {
        throw SolverStalled("phase one reported an unbounded ray");
      }
      double infeasibility = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        if (is_artificial(basis_[r])) infeasibility += xb_[r];
      }
      double scale = 1.0;
      for (double v : rhs_) scale = std::max(scale, std::abs(v));
      if (infeasibility > opt_.feasibility_tol * scale * 10.0) {
        sol.status = Status::infeasible;
        sol.iterations = iterations_;
        return sol;
      }
      drive_out_artificials();
    }
    set_phase_costs(/*phase_one=*/false);
    if (iterate(/*phase_one=*/false) == Outcome::unbounded) {
      sol.status = Status::unbounded;
      sol.iterations = iterations_;
      return sol;
    }
    extract(sol);
    return sol;
  }

 private:
  enum class Outcome { optimal, unbounded };

  bool is_artificial(std::size_t col) const { return col >= art_begin_; }

  double& at(std::size_t r, std::size_t c) { return tab_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return tab_[r * cols_ + c]; }

  void build() {
    row_sign_.assign(m_, 1.0);
    rhs_.resize(m_);
    std::vector<Sense> sense(lp_.senses);
    for (std::size_t r = 0; r < m_; ++r) {
      double shifted = lp_.rhs[r];
      for (std::size_t j = 0; j < n_; ++j) shifted -= lp_.coeff(r, j) * lp_.lower[j];
      if (shifted < 0.0) {
        row_sign_[r] = -1.0;
        shifted = -shifted;
        if (sense[r] == Sense::less_equal) sense[r] = Sense::greater_equal;
        else if (sense[r] == Sense::greater_equal) sense[r] = Sense::less_equal;
      }
      rhs_[r] = shifted;
    }

    std::size_t num_logical = 0;
    std::size_t num_art = 0;
    for (auto s : sense) {
      if (s != Sense::equal) ++num_logical;
      if (s != Sense::less_equal) ++num_art;
    }
    art_begin_ = n_ + num_logical;
    cols_ = art_begin_ + num_art;
    has_artificials_ = num_art > 0;

    tab_.assign(m_ * cols_, 0.0);
    cap_.assign(cols_, kInfinity);
    for (std::size_t j = 0; j < n_; ++j) cap_[j] = lp_.upper[j] - lp_.lower[j];
    at_upper_.assign(cols_, 0);
    basis_.assign(m_, kNone);
    identity_col_.assign(m_, kNone);
    xb_ = rhs_;

    std::size_t next_logical = n_;
    std::size_t next_art = art_begin_;
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t j = 0; j < n_; ++j) at(r, j) = row_sign_[r] * lp_.coeff(r, j);
      switch (sense[r]) {
        case Sense::less_equal:
          at(r, next_logical) = 1.0;
          identity_col_[r] = next_logical++;
          break;
        case Sense::greater_equal:
          at(r, next_logical++) = -1.0;
          at(r, next_art) = 1.0;
          identity_col_[r] = next_art++;
          break;
        case Sense::equal:
          at(r, next_art) = 1.0;
          identity_col_[r] = next_art++;
          break;
      }
      basis_[r] = identity_col_[r];
    }
    in_basis_.assign(cols_, 0);
    for (auto c : basis_) in_basis_[c] = 1;
    cost_.assign(cols_, 0.0);
    d_.assign(cols_, 0.0);
  }

  void set_phase_costs(bool phase_one) {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    if (phase_one) {
      for (std::size_t c = art_begin_; c < cols_; ++c) cost_[c] = 1.0;
    } else {
      for (std::size_t j = 0; j < n_; ++j) cost_[j] = lp_.objective[j];
    }
    for (std::size_t c = 0; c < cols_; ++c) {
      double z = 0.0;
      for (std::size_t r = 0; r < m_; ++r) z += cost_[basis_[r]] * at(r, c);
      d_[c] = cost_[c] - z;
    }
    for (auto c : basis_) d_[c] = 0.0;
  }

  double nonbasic_value(std::size_t c) const { return at_upper_[c] ? cap_[c] : 0.0; }

  std::size_t choose_entering(bool phase_one) const {
    std::size_t best = kNone;
    double best_score = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
      if (in_basis_[c]) continue;
      if (!phase_one && is_artificial(c)) continue;
      if (cap_[c] <= 0.0) continue;
      const double dc = d_[c];
      const bool improving = at_upper_[c] ? dc > opt_.optimality_tol : dc < -opt_.optimality_tol;
      if (!improving) continue;
      if (bland_) return c;
      const double score = std::abs(dc);
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    return best;
  }

  void pivot(std::size_t r, std::size_t c) {
    const double piv = at(r, c);
    double* prow = &tab_[r * cols_];
    for (std::size_t k = 0; k < cols_; ++k) prow[k] /= piv;
    prow[c] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      double* row = &tab_[i * cols_];
      for (std::size_t k = 0; k < cols_; ++k) row[k] -= f * prow[k];
      row[c] = 0.0;
    }
    const double f = d_[c];
    if (f != 0.0) {
      for (std::size_t k = 0; k < cols_; ++k) d_[k] -= f * prow[k];
      d_[c] = 0.0;
    }
    in_basis_[basis_[r]] = 0;
    basis_[r] = c;
    in_basis_[c] = 1;
    at_upper_[c] = 0;
  }

  Outcome iterate(bool phase_one) {
    std::size_t degenerate_streak = 0;
    while (true) {
      const std::size_t c = choose_entering(phase_one);
      if (c == kNone) return Outcome::optimal;
      if (++iterations_ > max_iterations_) {
        throw SolverStalled("iteration cap of " + std::to_string(max_iterations_) + " reached");
      }
      const double dir = at_upper_[c] ? -1.0 : 1.0;

      // Ratio test. Leaving basics either fall to 0 or rise to their cap.
      double step = cap_[c];
      std::size_t leave = kNone;
      bool leave_to_upper = false;
      double leave_alpha = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        const double alpha = dir * at(r, c);
        double ratio;
        bool to_upper;
        if (alpha > opt_.pivot_tol) {
          ratio = std::max(0.0, xb_[r]) / alpha;
          to_upper = false;
        } else if (alpha < -opt_.pivot_tol && std::isfinite(cap_[basis_[r]])) {
          ratio = std::max(0.0, cap_[basis_[r]] - xb_[r]) / -alpha;
          to_upper = true;
        } else {
          continue;
        }
        bool take = false;
        if (leave == kNone) {
          take = ratio < step;
        } else if (ratio < step - 1e-12) {
          take = true;
        } else if (ratio <= step + 1e-12) {
          // Tie: Bland keeps the lowest basic index, Dantzig the largest pivot.
          take = bland_ ? basis_[r] < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha);
        }
        if (take) {
          step = std::min(step, ratio);
          leave = r;
          leave_to_upper = to_upper;
          leave_alpha = alpha;
        }
      }

      if (leave == kNone && !std::isfinite(step)) return Outcome::unbounded;

      if (step <= opt_.feasibility_tol) {
        if (++degenerate_streak > opt_.degenerate_streak_limit) bland_ = true;
      } else {
        degenerate_streak = 0;
      }

      for (std::size_t r = 0; r < m_; ++r) xb_[r] -= step * dir * at(r, c);

      if (leave == kNone) {
        at_upper_[c] = at_upper_[c] ? 0 : 1;
        continue;
      }
      const double entering_value = at_upper_[c] ? cap_[c] - step : step;
      const std::size_t leaving = basis_[leave];
      pivot(leave, c);
      at_upper_[leaving] = leave_to_upper ? 1 : 0;
      xb_[leave] = entering_value;
    }
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (!is_artificial(basis_[r])) continue;
      std::size_t best = kNone;
      double best_mag = 1e-9;
      for (std::size_t c = 0; c < art_begin_; ++c) {
        if (in_basis_[c]) continue;
        const double mag = std::abs(at(r, c));
        if (mag > best_mag) {
          best_mag = mag;
          best = c;
        }
      }
      if (best == kNone) continue;  // redundant row; its artificial stays basic at zero
      const double value = nonbasic_value(best);
      pivot(r, best);
      xb_[r] = value;
    }
    for (std::size_t c = art_begin_; c < cols_; ++c) {
      cap_[c] = 0.0;
      if (!in_basis_[c]) at_upper_[c] = 0;
    }
  }

  void extract(LpSolution& sol) const {
    sol.status = Status::optimal;
    sol.iterations = iterations_;
    sol.x.assign(n_, 0.0);
    Vec col_value(cols_, 0.0);
    for (std::size_t c = 0; c < cols_; ++c) {
      if (!in_basis_[c]) col_value[c] = nonbasic_value(c);
    }
    for (std::size_t r = 0; r < m_; ++r) col_value[basis_[r]] = xb_[r];
    for (std::size_t j = 0; j < n_; ++j) {
      double v = std::clamp(col_value[j], 0.0, cap_[j]);
      sol.x[j] = lp_.lower[j] + v;
    }
    sol.duals.assign(m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) sol.duals[r] = -row_sign_[r] * d_[identity_col_[r]];
    sol.reduced_costs.assign(d_.begin(), d_.begin() + static_cast<std::ptrdiff_t>(n_));
    double obj = 0.0;
    for (std::size_t j = 0; j < n_; ++j) obj += lp_.objective[j] * sol.x[j];
    sol.objective_value = obj;

    for (std::size_t r = 0; r < m_; ++r) {
      double ax = 0.0;
      for (std::size_t j = 0; j < n_; ++j) ax += lp_.coeff(r, j) * sol.x[j];
      const double tol = opt_.residual_tol * (1.0 + std::abs(lp_.rhs[r]));
      double viol = 0.0;
      switch (lp_.senses[r]) {
        case Sense::less_equal: viol = ax - lp_.rhs[r]; break;
        case Sense::greater_equal: viol = lp_.rhs[r] - ax; break;
        case Sense::equal: viol = std::abs(ax - lp_.rhs[r]); break;
      }
      if (viol > tol) {
        throw SolverStalled("row " + std::to_string(r) + " violated by " + std::to_string(viol) +
                            " after " + std::to_string(iterations_) + " pivots");
      }
    }
  }

  const LinearProgram& lp_;
  const SolverOptions& opt_;
  std::size_t m_;
  std::size_t n_;
  std::size_t cols_ = 0;
  std::size_t art_begin_ = 0;
  bool has_artificials_ = false;
  bool bland_ = false;
  std::size_t iterations_ = 0;
  std::size_t max_iterations_ = 0;

  std::vector<double> tab_;
  Vec rhs_;
  Vec row_sign_;
  Vec xb_;
  Vec cap_;
  Vec cost_;
  Vec d_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> identity_col_;
  std::vector<std::uint8_t> at_upper_;
  std::vector<std::uint8_t> in_basis_;
};

}  // namespace

LpSolution solve(const LinearProgram& lp, const SolverOptions& options) {
  lp.validate();
  Simplex simplex(lp, options);
  LpSolution sol = simplex.run();
  if (sol.status != Status::optimal) {
    sol.x.clear();
    sol.duals.clear();
    sol.reduced_costs.clear();
  }
  return sol;
}

Certificate certify(const LinearProgram& lp, const LpSolution& sol) {
  Certificate cert;
  const std::size_t n = lp.num_vars();
  const std::size_t m = lp.num_rows();
  Vec reduced(lp.objective);
  double dual_obj = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    double ax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      ax += lp.coeff(r, j) * sol.x[j];
      reduced[j] -= lp.coeff(r, j) * sol.duals[r];
    }
    const double y = sol.duals[r];
    const double slack = ax - lp.rhs[r];
    double viol = 0.0;
    double sign_viol = 0.0;
    switch (lp.senses[r]) {
      case Sense::less_equal:
        viol = std::max(0.0, slack);
        sign_viol = std::max(0.0, y);
        break;
      case Sense::greater_equal:
        viol = std::max(0.0, -slack);
        sign_viol = std::max(0.0, -y);
        break;
      case Sense::equal: viol = std::abs(slack); break;
    }
    cert.max_primal_violation = std::max(cert.max_primal_violation, viol);
    cert.max_dual_sign_violation = std::max(cert.max_dual_sign_violation, sign_viol);
    cert.max_complementarity =
        std::max(cert.max_complementarity, std::abs(y * slack) / (1.0 + std::abs(lp.rhs[r])));
    dual_obj += y * lp.rhs[r];
  }
  double primal_obj = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    primal_obj += lp.objective[j] * sol.x[j];
    cert.max_primal_violation = std::max(cert.max_primal_violation, lp.lower[j] - sol.x[j]);
    if (std::isfinite(lp.upper[j])) {
      cert.max_primal_violation = std::max(cert.max_primal_violation, sol.x[j] - lp.upper[j]);
    }
    // Box multipliers: positive reduced cost prices the lower bound, negative the upper.
    const double dj = reduced[j];
    if (dj >= 0.0) {
      dual_obj += dj * lp.lower[j];
    } else if (std::isfinite(lp.upper[j])) {
      dual_obj += dj * lp.upper[j];
    } else {
      cert.max_dual_sign_violation = std::max(cert.max_dual_sign_violation, -dj);
    }
  }
  cert.duality_gap = std::abs(primal_obj - dual_obj);
  return cert;
}

}  // namespace switchbid::lp
