#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace lorasp {

using Index = std::ptrdiff_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

} // namespace lorasp
