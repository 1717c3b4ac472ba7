#pragma once

#include <Eigen/Dense>

namespace elab {

template <int N> using Vec = Eigen::Matrix<double, N, 1>;
template <int N> using Mat = Eigen::Matrix<double, N, N>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;
using Mat2 = Mat<2>;
using Mat3 = Mat<3>;

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using ArrX = Eigen::ArrayXd;
using ArrXX = Eigen::ArrayXXd;

} // namespace elab
