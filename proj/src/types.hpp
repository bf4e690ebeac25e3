#pragma once

#include <Eigen/Dense>

namespace hmmlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace hmmlab
