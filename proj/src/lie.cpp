// SPDX-License-Identifier: Apache-2.0
#include "ankf/lie.hpp"

#include <cmath>

#include "ankf/errors.hpp"

namespace ankf::lie {

Eigen::Matrix3d hat3(const Eigen::Vector3d& v) {
    Eigen::Matrix3d M;
    // clang-format off
    M <<     0, -v(2),  v(1),
          v(2),     0, -v(0),
         -v(1),  v(0),     0;
    // clang-format on
    return M;
}

Eigen::Vector3d vee3(const Eigen::Matrix3d& M) {
    if ((M + M.transpose()).norm() >= 1e-6) {
        throw NumericalError("vee3: matrix is not antisymmetric");
    }
    return {M(2, 1), M(0, 2), M(1, 0)};
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& theta) {
    const double t = theta.norm();
    const Eigen::Matrix3d A = hat3(theta);
    if (t < kSmallAngle) {
        // Second-order series; error O(t^3) < 1e-12 below the threshold.
        return Eigen::Matrix3d::Identity() + A + 0.5 * A * A;
    }
    const double t2 = t * t;
    return Eigen::Matrix3d::Identity() + (std::sin(t) / t) * A +
           ((1.0 - std::cos(t)) / t2) * A * A;
}

Eigen::Vector3d log_so3(const Eigen::Matrix3d& R) {
    const double tr = R.trace();
    const double c = std::clamp(0.5 * (tr - 1.0), -1.0, 1.0);
    const double t = std::acos(c);

    if (t < kSmallAngle) {
        // log(R) ~ (R - R^T)/2 with a second-order trace correction.
        Eigen::Matrix3d A = 0.5 * (R - R.transpose());
        Eigen::Vector3d w(A(2, 1), A(0, 2), A(1, 0));
        return (1.0 + t * t / 6.0) * w;
    }

    if (t > M_PI - 1e-6) {
        // Near pi: R ~ I + 2 aa^T - ...; recover the axis from the dominant
        // diagonal entry, fix signs from off-diagonals, first nonzero >= 0.
        Eigen::Matrix3d S = 0.5 * (R + Eigen::Matrix3d::Identity());
        int k = 0;
        S.diagonal().maxCoeff(&k);
        Eigen::Vector3d axis;
        axis(k) = std::sqrt(std::max(0.0, S(k, k)));
        for (int i = 0; i < 3; ++i) {
            if (i != k) axis(i) = S(k, i) / axis(k);
        }
        axis.normalize();
        if (axis(0) < 0 || (axis(0) == 0 && axis(1) < 0) ||
            (axis(0) == 0 && axis(1) == 0 && axis(2) < 0)) {
            axis = -axis;
        }
        // Refine the angle away from exactly pi using the antisymmetric part.
        Eigen::Vector3d w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
        const double s = 0.5 * w.dot(axis);  // sin(t) along the axis
        const double angle = std::atan2(s, c);
        return (angle >= 0 ? angle : angle + 2.0 * M_PI) * axis;
    }

    Eigen::Vector3d w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
    return (t / (2.0 * std::sin(t))) * w;
}

Eigen::Matrix3d left_jacobian_so3(const Eigen::Vector3d& theta) {
    const double t = theta.norm();
    const Eigen::Matrix3d A = hat3(theta);
    if (t < kSmallAngle) {
        return Eigen::Matrix3d::Identity() + 0.5 * A + (1.0 / 6.0) * A * A;
    }
    const double t2 = t * t;
    return Eigen::Matrix3d::Identity() + ((1.0 - std::cos(t)) / t2) * A +
           ((t - std::sin(t)) / (t2 * t)) * A * A;
}

Eigen::Matrix3d gamma0(const Eigen::Vector3d& phi) { return exp_so3(phi); }

Eigen::Matrix3d gamma1(const Eigen::Vector3d& phi) { return left_jacobian_so3(phi); }

Eigen::Matrix3d gamma2(const Eigen::Vector3d& phi) {
    const double t = phi.norm();
    const Eigen::Matrix3d A = hat3(phi);
    if (t < kSmallAngle) {
        return 0.5 * Eigen::Matrix3d::Identity() + (1.0 / 6.0) * A + (1.0 / 24.0) * A * A;
    }
    const double t2 = t * t;
    return 0.5 * Eigen::Matrix3d::Identity() + ((t - std::sin(t)) / (t2 * t)) * A +
           ((t2 + 2.0 * std::cos(t) - 2.0) / (2.0 * t2 * t2)) * A * A;
}

GroupMatrix exp_sek3(const TangentVector& xi) {
    GroupMatrix X = GroupMatrix::Identity();
    const Eigen::Vector3d theta = xi.head<3>();
    X.topLeftCorner<3, 3>() = exp_so3(theta);
    const Eigen::Matrix3d Jl = left_jacobian_so3(theta);
    for (int i = 0; i < 2 + kNumContacts; ++i) {
        X.block<3, 1>(0, 3 + i) = Jl * xi.segment<3>(3 + 3 * i);
    }
    return X;
}

AdjointMatrix adjoint_sek3(const GroupMatrix& Z) {
    AdjointMatrix adj = AdjointMatrix::Zero();
    const Eigen::Matrix3d R = Z.topLeftCorner<3, 3>();
    adj.topLeftCorner<3, 3>() = R;
    for (int i = 0; i < 2 + kNumContacts; ++i) {
        adj.block<3, 3>(3 + 3 * i, 3 + 3 * i) = R;
        adj.block<3, 3>(3 + 3 * i, 0) = hat3(Z.block<3, 1>(0, 3 + i)) * R;
    }
    return adj;
}

GroupMatrix inverse_sek3(const GroupMatrix& Z) {
    GroupMatrix inv = GroupMatrix::Identity();
    const Eigen::Matrix3d Rt = Z.topLeftCorner<3, 3>().transpose();
    inv.topLeftCorner<3, 3>() = Rt;
    for (int i = 0; i < 2 + kNumContacts; ++i) {
        inv.block<3, 1>(0, 3 + i) = -Rt * Z.block<3, 1>(0, 3 + i);
    }
    return inv;
}

}  // namespace ankf::lie
