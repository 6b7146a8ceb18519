#pragma once

#include <Eigen/Dense>

namespace phrelu {

/// Row-major so that one observation is a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace phrelu
