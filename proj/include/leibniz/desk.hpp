#pragma once

#include "leibniz/dp.hpp"

namespace leibniz::desk
{

/// lo, lo + step, ..., hi as 1-D states (hi included when on the lattice).
std::vector<Vector> grid1d(Scalar lo, Scalar hi, Scalar step);

/// u = 1 + y on the states {0, 1}, every state admissible, beta = 0.5.
DPModel unit_cost();

/// u = (x - a)^2 + y^2 on [-1, 1] with step 0.1, box [-1, 1]. The grid
/// optimum is y = beta a / (1 + beta).
DPModel quadratic(Scalar a = 0.6, Scalar beta = 0.5);

/// u_w = (x - a_w)^2 + y^2 with a = (0.3, 0.9), P = [[.75, .25], [.25, .75]],
/// beta = 0.5, step 0.05, box [-1, 1]. Optima 0.15 and 0.25.
DPModel two_shock();

/// u_w = (y - x)^2 + c_w with c = (0, 1), uniform kernel, beta = 0.5, box [-1, 1].
DPModel stay_put();

/// u = (y - 2)^2 on box [-1, 1], beta = 0: minimizer on the upper bound.
DPModel boundary();

/// u = -|x| + 10 y^2, beta = 0.5, box [-1, 1]: optimum y = 0 where the next
/// cost has the two-point limiting x-subdifferential {-1, 1}.
DPModel nonsmooth();

/// u = y subject to x - y <= 0 (NLP form), beta = 0: v(x) = x.
DPModel ge_constraint();

/// u = y subject to two copies of x - y <= 0.
DPModel twin_constraint();

/// u = y subject to two copies of y - x = 0 (rank-deficient equalities).
DPModel rank_deficient();

/// u = |y| on the states {-1, 1}: a policy tie.
DPModel tie();

} // namespace leibniz::desk
