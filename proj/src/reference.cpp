#include "switchbid/reference.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace switchbid::reference {

namespace {

struct Hyperplane {
  std::vector<double> coeffs;
  double rhs;
};

// Solves the square system in place; false when singular.
bool gaussian_solve(std::vector<std::vector<double>> a, std::vector<double> b,
                    std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-10) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

bool feasible(const lp::LinearProgram& lp, const std::vector<double>& x, double tol) {
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    if (x[j] < lp.lower[j] - tol || x[j] > lp.upper[j] + tol) return false;
  }
  for (std::size_t r = 0; r < lp.num_rows(); ++r) {
    double ax = 0.0;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) ax += lp.coeff(r, j) * x[j];
    const double scaled = tol * (1.0 + std::abs(lp.rhs[r]));
    switch (lp.senses[r]) {
      case lp::Sense::less_equal:
        if (ax > lp.rhs[r] + scaled) return false;
        break;
      case lp::Sense::greater_equal:
        if (ax < lp.rhs[r] - scaled) return false;
        break;
      case lp::Sense::equal:
        if (std::abs(ax - lp.rhs[r]) > scaled) return false;
        break;
    }
  }
  return true;
}

}  // namespace

std::optional<double> vertex_enumeration_minimum(const lp::LinearProgram& lp, double feas_tol) {
  const std::size_t n = lp.num_vars();
  std::vector<Hyperplane> planes;
  for (std::size_t r = 0; r < lp.num_rows(); ++r) {
    Hyperplane h{std::vector<double>(n), lp.rhs[r]};
    for (std::size_t j = 0; j < n; ++j) h.coeffs[j] = lp.coeff(r, j);
    planes.push_back(std::move(h));
  }
  for (std::size_t j = 0; j < n; ++j) {
    Hyperplane lo{std::vector<double>(n, 0.0), lp.lower[j]};
    lo.coeffs[j] = 1.0;
    planes.push_back(std::move(lo));
    if (std::isfinite(lp.upper[j])) {
      Hyperplane hi{std::vector<double>(n, 0.0), lp.upper[j]};
      hi.coeffs[j] = 1.0;
      planes.push_back(std::move(hi));
    }
  }

  std::optional<double> best;
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  const std::size_t total = planes.size();
  if (total < n) return best;
  std::vector<double> x;
  while (true) {
    std::vector<std::vector<double>> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = planes[pick[i]].coeffs;
      b[i] = planes[pick[i]].rhs;
    }
    if (gaussian_solve(a, b, x) && feasible(lp, x, feas_tol)) {
      double obj = 0.0;
      for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * x[j];
      if (!best || obj < *best) best = obj;
    }
    // Next combination in lexicographic order.
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == total - n + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < n; ++k) pick[k] = pick[k - 1] + 1;
  }
  return best;
}

lp::LinearProgram random_bounded_lp(Rng& rng, std::size_t num_vars, std::size_t num_rows) {
  std::uniform_real_distribution<double> coeff(-3.0, 3.0);
  std::uniform_real_distribution<double> slack(0.0, 4.0);
  std::uniform_real_distribution<double> inside(1.0, 9.0);
  std::uniform_int_distribution<int> sense_pick(0, 9);

  lp::LinearProgram lp(num_vars);
  for (auto& c : lp.objective) c = coeff(rng);
  for (auto& u : lp.upper) u = 10.0;
  std::vector<double> x0(num_vars);
  for (auto& v : x0) v = inside(rng);

  std::vector<double> row(num_vars);
  for (std::size_t r = 0; r < num_rows; ++r) {
    double ax = 0.0;
    for (std::size_t j = 0; j < num_vars; ++j) {
      row[j] = coeff(rng);
      ax += row[j] * x0[j];
    }
    const int s = sense_pick(rng);
    if (s < 5) {
      lp.add_row(row, lp::Sense::less_equal, ax + slack(rng));
    } else if (s < 9) {
      lp.add_row(row, lp::Sense::greater_equal, ax - slack(rng));
    } else {
      lp.add_row(row, lp::Sense::equal, ax);
    }
  }
  return lp;
}

}  // namespace switchbid::reference
