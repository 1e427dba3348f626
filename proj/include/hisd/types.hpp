#pragma once

#include <Eigen/Dense>

namespace hisd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace hisd
