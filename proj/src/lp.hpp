#pragma once

#include "types.hpp"

namespace hmmlab {

struct LpResult {
    bool feasible = false;
    bool bounded = true;
    double value = 0.0;
    Vector x;
};

// Minimize c^T x subject to A x = b, x >= 0, by two-phase dense simplex with
// Bland's rule. Sized for the many tiny LPs behind the exact l1 gain; not a
// general-purpose solver.
LpResult solve_lp_equality(const Matrix& A, const Vector& b, const Vector& c);

}  // namespace hmmlab
