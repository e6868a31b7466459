#pragma once

#include <limits>
#include <vector>

namespace ariel {

/// maximize c·x  subject to  A x <= b,  0 <= x <= upper, then among those
/// optima maximize c2·x (when c2 is given). Requires b >= 0 so the
/// all-slack basis is feasible.
struct BoundedLp {
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<double> c;
  std::vector<double> c2;     // optional secondary objective
  std::vector<double> upper;  // +inf for unbounded above
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dense primal simplex with bound flipping. Dantzig pricing, falling back to
/// Bland's rule while pivots stay degenerate. The secondary objective is
/// optimized over columns whose primary reduced cost is zero. Throws
/// Error(Infeasible) when the problem is unbounded or the right-hand side is
/// negative.
LpSolution solve_bounded_lp(const BoundedLp& lp);

}  // namespace ariel
