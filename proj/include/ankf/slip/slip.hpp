// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "ankf/sim/episode.hpp"
#include "ankf/sim/kinematics.hpp"

namespace ankf::slip {

struct SlipParams {
    double k = 50.0;    // sigmoid steepness, s/m
    double v_th = 0.1;  // foot-velocity threshold, m/s
};

// Continuous slip severity in [0,1]; exactly 0 when not in contact.
double slip_level(const Eigen::Vector3d& foot_vel_w, bool contact, const SlipParams& params);

// Per-foot slip levels from an estimated base state and measured kinematics,
// as available at deployment (no ground truth).
Eigen::Vector4d slip_levels_from_estimate(const Eigen::Matrix3d& R_est,
                                          const Eigen::Vector3d& v_est,
                                          const Eigen::Vector3d& omega_body,
                                          const Eigen::Matrix<double, 12, 1>& joint_pos,
                                          const Eigen::Matrix<double, 12, 1>& joint_vel,
                                          const std::array<bool, sim::kNumLegs>& contact,
                                          const sim::RobotModel& model, const SlipParams& params);

struct ErrorNorms {
    double rot = 0.0;  // rad
    double vel = 0.0;  // m/s
    double pos = 0.0;  // m
};

ErrorNorms state_error_norms(const Eigen::Matrix3d& R_est, const Eigen::Vector3d& v_est,
                             const Eigen::Vector3d& p_est, const sim::GroundTruthState& gt);

struct CorrelationReport {
    double pearson_r = 0.0;
    std::array<double, 5> bin_means{};   // slip bins of width 0.2 over [0,1]
    std::array<double, 5> bin_stds{};
    std::array<size_t, 5> bin_counts{};
    double p95_rot = 0.0;
    double p95_vel = 0.0;
    double p95_pos = 0.0;
};

// Errors normalized by their own 95th percentile, combined into a scalar,
// correlated against a per-frame slip level and binned at width 0.2.
CorrelationReport correlation_report(const std::vector<ErrorNorms>& errors,
                                     const std::vector<double>& slip);

// Linear interpolation between order statistics.
double percentile(std::vector<double> values, double q);

}  // namespace ankf::slip
