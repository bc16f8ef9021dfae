#pragma once

#include <Eigen/Core>

namespace loggpis {

// Positions are stored one point per row (N x D, D in {2, 3}).
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline bool IsSupportedDim(Eigen::Index dim) { return dim == 2 || dim == 3; }

}  // namespace loggpis
