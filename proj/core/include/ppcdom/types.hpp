#pragma once

#include <Eigen/Core>

namespace ppcdom {

/// Number of control channels: two grippers, each with a linear and an
/// angular velocity.
inline constexpr int kControlDim = 12;

using Vec3 = Eigen::Vector3d;
using Twist = Eigen::Matrix<double, kControlDim, 1>;
/// Stacked (position, rotation vector) of both grippers.
using Configuration = Eigen::Matrix<double, kControlDim, 1>;

}  // namespace ppcdom
