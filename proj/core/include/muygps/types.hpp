#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

namespace muygps {

/// Dense sample-by-feature matrix; one observation per row.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using Seed = std::uint64_t;

}  // namespace muygps
