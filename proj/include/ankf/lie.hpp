// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace ankf::lie {

// Matrix Lie-group primitives for SO(3) and SE_{N+2}(3) with N = 4 tracked
// contact points. The group element is a 9x9 block matrix
//   [ R  v  p  d1 d2 d3 d4 ]
//   [ 0  I_{6}             ]
// and its tangent is ordered [theta; v; p; d1; d2; d3; d4] (21-dim).

inline constexpr int kNumContacts = 4;
inline constexpr int kGroupDim = 5 + kNumContacts;      // 9x9 matrices
inline constexpr int kTangentDim = 3 * (2 + kNumContacts) + 3;  // 21

using GroupMatrix = Eigen::Matrix<double, kGroupDim, kGroupDim>;
using TangentVector = Eigen::Matrix<double, kTangentDim, 1>;
using AdjointMatrix = Eigen::Matrix<double, kTangentDim, kTangentDim>;

// Threshold below which exp/log/Jacobian formulas switch to their series.
inline constexpr double kSmallAngle = 1e-4;

Eigen::Matrix3d hat3(const Eigen::Vector3d& v);

// Requires ||M + M^T|| < 1e-6; throws NumericalError otherwise.
Eigen::Vector3d vee3(const Eigen::Matrix3d& M);

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& theta);

// Principal value, ||theta|| <= pi. Near pi the axis is recovered from the
// dominant diagonal entry with a deterministic sign convention.
Eigen::Vector3d log_so3(const Eigen::Matrix3d& R);

// Left Jacobian of SO(3).
Eigen::Matrix3d left_jacobian_so3(const Eigen::Vector3d& theta);

// Gamma_n integrals of the SO(3) exponential as used by IMU propagation:
// gamma0 = exp, gamma1 = left Jacobian, gamma2 = double integral term.
Eigen::Matrix3d gamma0(const Eigen::Vector3d& phi);
Eigen::Matrix3d gamma1(const Eigen::Vector3d& phi);
Eigen::Matrix3d gamma2(const Eigen::Vector3d& phi);

// Block closed form: rotation block exp_so3, each column J_l(theta) * xi_i.
GroupMatrix exp_sek3(const TangentVector& xi);

AdjointMatrix adjoint_sek3(const GroupMatrix& Z);

GroupMatrix inverse_sek3(const GroupMatrix& Z);

}  // namespace ankf::lie
