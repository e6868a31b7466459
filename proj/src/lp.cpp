#include "ariel/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ariel/types.hpp"

namespace ariel {

namespace {
constexpr double kEps = 1e-11;
}

LpSolution solve_bounded_lp(const BoundedLp& lp) {
  const std::size_t m = lp.A.size();
  const std::size_t n = lp.c.size();
  if (lp.b.size() != m || lp.upper.size() != n || (!lp.c2.empty() && lp.c2.size() != n)) throw Error(ErrorCode::Argument, "LP dimensions disagree");
  for (std::size_t i = 0; i < m; ++i) {
    if (lp.A[i].size() != n) throw Error(ErrorCode::Argument, "LP row " + std::to_string(i) + " has wrong width");
    if (lp.b[i] < 0) throw Error(ErrorCode::Infeasible, "LP right-hand side is negative");
  }
  for (double u : lp.upper)
    if (u < 0) throw Error(ErrorCode::Infeasible, "LP upper bound is negative");

  // Columns 0..n-1 are structural, n..n+m-1 are slacks.
  const std::size_t cols = n + m;
  std::vector<std::vector<double>> T(m, std::vector<double>(cols, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T[i][j] = lp.A[i][j];
    T[i][n + i] = 1.0;
  }
  std::vector<double> upper(cols, kInf);
  for (std::size_t j = 0; j < n; ++j) upper[j] = lp.upper[j];

  std::vector<double> d(cols, 0.0);  // reduced costs, primary
  std::vector<double> d2(cols, 0.0);  // reduced costs, secondary
  for (std::size_t j = 0; j < n; ++j) d[j] = lp.c[j];
  for (std::size_t j = 0; j < lp.c2.size(); ++j) d2[j] = lp.c2[j];
  std::vector<double> xb = lp.b;
  std::vector<std::size_t> basis(m);
  std::vector<int> where(cols, -1);  // row of a basic column, -1 if nonbasic
  std::vector<char> at_upper(cols, 0);
  for (std::size_t i = 0; i < m; ++i) {
    basis[i] = n + i;
    where[n + i] = static_cast<int>(i);
  }

  LpSolution sol;
  int degenerate_run = 0;
  bool secondary = false;
  const int max_iter = 100 * static_cast<int>(cols + 10);
  for (;;) {
    if (sol.iterations++ > max_iter) throw Error(ErrorCode::Consistency, "simplex iteration limit reached");
    const bool bland = degenerate_run > 20;

    std::size_t enter = cols;
    double best = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (where[j] >= 0) continue;
      double gain = at_upper[j] ? -d[j] : d[j];
      if (secondary) {
        if (std::fabs(d[j]) > 1e-9) continue;  // would move the primary optimum
        gain = at_upper[j] ? -d2[j] : d2[j];
        if (gain <= 1e-12) continue;
      } else if (gain <= 1e-9) {
        continue;
      }
      if (bland) {
        enter = j;
        break;
      }
      if (gain > best) {
        best = gain;
        enter = j;
      }
    }
    if (enter == cols) {
      if (secondary || lp.c2.empty()) break;
      secondary = true;
      degenerate_run = 0;
      continue;
    }

    const double dir = at_upper[enter] ? -1.0 : 1.0;
    double theta = upper[enter];
    int leave = -1;
    bool leave_to_upper = false;
    for (std::size_t i = 0; i < m; ++i) {
      double alpha = T[i][enter] * dir;
      double limit;
      bool to_upper;
      if (alpha > kEps) {
        limit = xb[i] / alpha;
        to_upper = false;
      } else if (alpha < -kEps && std::isfinite(upper[basis[i]])) {
        limit = (upper[basis[i]] - xb[i]) / -alpha;
        to_upper = true;
      } else {
        continue;
      }
      limit = std::max(limit, 0.0);
      if (limit < theta - 1e-12 || (leave >= 0 && std::fabs(limit - theta) <= 1e-12 && basis[i] < basis[leave])) {
        theta = limit;
        leave = static_cast<int>(i);
        leave_to_upper = to_upper;
      }
    }
    if (!std::isfinite(theta)) throw Error(ErrorCode::Infeasible, "LP is unbounded");
    degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;

    for (std::size_t i = 0; i < m; ++i) xb[i] -= T[i][enter] * dir * theta;
    double enter_value = (at_upper[enter] ? upper[enter] : 0.0) + dir * theta;

    if (leave < 0) {
      at_upper[enter] = !at_upper[enter];  // bound flip, basis unchanged
      continue;
    }

    const std::size_t r = static_cast<std::size_t>(leave);
    const std::size_t out = basis[r];
    const double piv = T[r][enter];
    for (double& v : T[r]) v /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r) continue;
      double f = T[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) T[i][j] -= f * T[r][j];
    }
    double f = d[enter];
    double f2 = d2[enter];
    for (std::size_t j = 0; j < cols; ++j) {
      d[j] -= f * T[r][j];
      d2[j] -= f2 * T[r][j];
    }

    where[out] = -1;
    at_upper[out] = leave_to_upper ? 1 : 0;
    basis[r] = enter;
    where[enter] = static_cast<int>(r);
    at_upper[enter] = 0;
    xb[r] = enter_value;
  }

  sol.x.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (where[j] >= 0) sol.x[j] = xb[static_cast<std::size_t>(where[j])];
    else if (at_upper[j]) sol.x[j] = upper[j];
    sol.x[j] = std::clamp(sol.x[j], 0.0, upper[j]);
  }
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.c[j] * sol.x[j];
  return sol;
}

}  // namespace ariel
