// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <array>

namespace ankf::sim {

inline constexpr int kNumLegs = 4;

// Leg order: FL, FR, RL, RR. Left legs have positive hip y offsets.
enum LegIndex { kFL = 0, kFR = 1, kRL = 2, kRR = 3 };

// 3-DOF point-foot leg: hip roll about x, hip pitch about y, knee pitch
// about y, with a lateral link of length hip_yaw_offset between the roll
// axis and the leg's sagittal plane.
struct RobotModel {
    std::array<Eigen::Vector3d, kNumLegs> hip_offsets{
        Eigen::Vector3d(0.188, 0.047, 0.0), Eigen::Vector3d(0.188, -0.047, 0.0),
        Eigen::Vector3d(-0.188, 0.047, 0.0), Eigen::Vector3d(-0.188, -0.047, 0.0)};
    double thigh_len = 0.213;
    double shank_len = 0.213;
    double hip_yaw_offset = 0.08;

    double side_sign(int leg) const { return (leg == kFL || leg == kRL) ? 1.0 : -1.0; }

    bool valid() const {
        if (!(thigh_len > 0.0 && shank_len > 0.0 && hip_yaw_offset >= 0.0)) return false;
        // Sagittal symmetry: left/right pairs mirror in y.
        for (int pair = 0; pair < 2; ++pair) {
            const auto& l = hip_offsets[2 * pair];
            const auto& r = hip_offsets[2 * pair + 1];
            if (std::abs(l.x() - r.x()) > 1e-12 || std::abs(l.y() + r.y()) > 1e-12 ||
                std::abs(l.z() - r.z()) > 1e-12) {
                return false;
            }
        }
        return true;
    }
};

}  // namespace ankf::sim
