// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "ankf/sim/robot_model.hpp"

namespace ankf::sim {

// Closed-form foot position in the body frame.
Eigen::Vector3d leg_forward_kinematics(const Eigen::Vector3d& joint_pos, int leg,
                                       const RobotModel& model);

// Inverse of the chain above; knee-extended-forward branch (q_knee >= 0).
// Throws DataError when the target is outside the reachable workspace.
Eigen::Vector3d leg_inverse_kinematics(const Eigen::Vector3d& foot_pos_body, int leg,
                                       const RobotModel& model);

// Columns are d(foot)/d(joint) in the body frame.
Eigen::Matrix3d analytic_leg_jacobian(const Eigen::Vector3d& joint_pos, int leg,
                                      const RobotModel& model);

struct BaseKinematics {
    Eigen::Matrix3d R;        // body to world
    Eigen::Vector3d v;        // world
    Eigen::Vector3d omega_b;  // body
};

// World-frame foot velocity: v + R (J qdot + omega x d_body).
Eigen::Vector3d foot_velocity_world(const BaseKinematics& base, const Eigen::Vector3d& joint_pos,
                                    const Eigen::Vector3d& joint_vel, int leg,
                                    const RobotModel& model);

}  // namespace ankf::sim
