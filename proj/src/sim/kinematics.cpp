// SPDX-License-Identifier: Apache-2.0
#include "ankf/sim/kinematics.hpp"

#include <cmath>

#include "ankf/errors.hpp"

namespace ankf::sim {

namespace {

Eigen::Matrix3d rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d R;
    R << 1, 0, 0, 0, c, -s, 0, s, c;
    return R;
}

Eigen::Matrix3d rot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d R;
    R << c, 0, s, 0, 1, 0, -s, 0, c;
    return R;
}

void check_leg(int leg) {
    if (leg < 0 || leg >= kNumLegs) throw DataError("invalid leg index");
}

}  // namespace

Eigen::Vector3d leg_forward_kinematics(const Eigen::Vector3d& q, int leg,
                                       const RobotModel& model) {
    check_leg(leg);
    const double s = model.side_sign(leg);
    const Eigen::Vector3d lateral(0.0, s * model.hip_yaw_offset, 0.0);
    const Eigen::Vector3d thigh(0.0, 0.0, -model.thigh_len);
    const Eigen::Vector3d shank(0.0, 0.0, -model.shank_len);
    return model.hip_offsets[leg] +
           rot_x(q(0)) * (lateral + rot_y(q(1)) * (thigh + rot_y(q(2)) * shank));
}

Eigen::Vector3d leg_inverse_kinematics(const Eigen::Vector3d& foot_pos_body, int leg,
                                       const RobotModel& model) {
    check_leg(leg);
    const double s = model.side_sign(leg);
    const double ly = s * model.hip_yaw_offset;
    const double lt = model.thigh_len;
    const double ls = model.shank_len;
    const Eigen::Vector3d f = foot_pos_body - model.hip_offsets[leg];

    // Hip roll: rotate (y, z) so the lateral component equals ly.
    const double r_yz = std::hypot(f.y(), f.z());
    if (r_yz < std::abs(ly) + 1e-12) {
        throw DataError("leg_inverse_kinematics: target unreachable (roll plane)");
    }
    const double q1 = std::atan2(f.z(), f.y()) +
                      std::acos(std::clamp(ly / r_yz, -1.0, 1.0));

    // Planar 2-link in the pitched sagittal plane.
    const Eigen::Vector3d g = rot_x(-q1) * f - Eigen::Vector3d(0.0, ly, 0.0);
    const double rho2 = g.x() * g.x() + g.z() * g.z();
    const double cos_knee = (rho2 - lt * lt - ls * ls) / (2.0 * lt * ls);
    if (cos_knee > 1.0 + 1e-9 || cos_knee < -1.0 + 1e-9) {
        throw DataError("leg_inverse_kinematics: target unreachable (leg plane)");
    }
    const double q3 = std::acos(std::clamp(cos_knee, -1.0, 1.0));
    const double q2 = std::atan2(-g.x(), -g.z()) -
                      std::atan2(ls * std::sin(q3), lt + ls * std::cos(q3));
    return {q1, q2, q3};
}

Eigen::Matrix3d analytic_leg_jacobian(const Eigen::Vector3d& q, int leg,
                                      const RobotModel& model) {
    check_leg(leg);
    const double s = model.side_sign(leg);
    const Eigen::Vector3d lateral(0.0, s * model.hip_yaw_offset, 0.0);
    const Eigen::Vector3d thigh(0.0, 0.0, -model.thigh_len);
    const Eigen::Vector3d shank(0.0, 0.0, -model.shank_len);

    const Eigen::Matrix3d Rx = rot_x(q(0));
    const Eigen::Matrix3d Ry2 = rot_y(q(1));
    const Eigen::Matrix3d Ry3 = rot_y(q(2));
    const Eigen::Vector3d ex = Eigen::Vector3d::UnitX();
    const Eigen::Vector3d ey = Eigen::Vector3d::UnitY();

    const Eigen::Vector3d shank_in_thigh = Ry3 * shank;
    const Eigen::Vector3d leg_in_roll = Ry2 * (thigh + shank_in_thigh);

    Eigen::Matrix3d J;
    J.col(0) = ex.cross(Rx * (lateral + leg_in_roll));
    J.col(1) = Rx * ey.cross(leg_in_roll);
    J.col(2) = Rx * Ry2 * ey.cross(shank_in_thigh);
    return J;
}

Eigen::Vector3d foot_velocity_world(const BaseKinematics& base, const Eigen::Vector3d& joint_pos,
                                    const Eigen::Vector3d& joint_vel, int leg,
                                    const RobotModel& model) {
    const Eigen::Vector3d d_body = leg_forward_kinematics(joint_pos, leg, model);
    const Eigen::Matrix3d J = analytic_leg_jacobian(joint_pos, leg, model);
    return base.v + base.R * (J * joint_vel + base.omega_b.cross(d_body));
}

}  // namespace ankf::sim
