#pragma once

#include <Eigen/Dense>

namespace rsvgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One point per row. Row-major so that a particle is a contiguous slice.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using VectorRef = Eigen::Ref<const Vector>;
using MatrixRef = Eigen::Ref<const Matrix>;

}  // namespace rsvgd
