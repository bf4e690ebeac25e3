#pragma once

#include <vector>

#include "types.hpp"

namespace hmmlab {

// Hungarian algorithm with potentials. cost is square k x k; returns the
// row -> column assignment minimizing total cost.
std::vector<int> min_cost_assignment(const Matrix& cost);

}  // namespace hmmlab
