#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qmrom {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Point2 = Eigen::Vector2d;

}  // namespace qmrom
