// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ankf/sim/robot_model.hpp"

namespace ankf::sim {

struct GaitConfig {
    double step_freq_hz = 2.0;
    double step_height_m = 0.06;
    double duty_factor = 0.55;
    double body_height_m = 0.30;
};

// Commanded body-frame twist held from t_start until the next entry.
struct TwistCommand {
    double t_start = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double wz = 0.0;
};

struct SlipSegment {
    double t_start = 0.0;
    double t_end = 0.0;
    double slip_vel_scale = 0.0;               // m/s, planar drift magnitude
    std::array<bool, kNumLegs> feet{true, true, true, true};
};

struct NoiseConfig {
    double gyro_std = 0.0;        // rad/s
    double accel_std = 0.0;       // m/s^2
    double joint_pos_std = 0.0;   // rad
    double joint_vel_std = 0.0;   // rad/s
    double gyro_bias_walk = 0.0;  // rad/s per sqrt(s)
    double accel_bias_walk = 0.0; // m/s^2 per sqrt(s)
};

struct EpisodeConfig {
    double duration_s = 20.0;
    double rate_hz = 500.0;
    GaitConfig gait;
    std::vector<TwistCommand> commands{{0.0, 0.4, 0.0, 0.0}};
    std::vector<SlipSegment> slip;
    NoiseConfig noise;
    double contact_accuracy = 1.0;  // in (0,1]; P(flip) = 1 - accuracy
    uint64_t seed = 0;

    bool valid(std::string* why = nullptr) const;
};

struct SensorFrame {
    double t = 0.0;
    Eigen::Vector3d gyro = Eigen::Vector3d::Zero();
    Eigen::Vector3d accel = Eigen::Vector3d::Zero();
    Eigen::Matrix<double, 12, 1> joint_pos = Eigen::Matrix<double, 12, 1>::Zero();
    Eigen::Matrix<double, 12, 1> joint_vel = Eigen::Matrix<double, 12, 1>::Zero();
    std::array<bool, kNumLegs> contact_est{};
    std::array<bool, kNumLegs> contact_gt{};
};

struct GroundTruthState {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    std::array<Eigen::Vector3d, kNumLegs> foot_pos_w{};
    std::array<Eigen::Vector3d, kNumLegs> foot_vel_w{};
};

struct Episode {
    EpisodeConfig config;
    RobotModel model;
    std::vector<SensorFrame> frames;
    std::vector<GroundTruthState> truth;

    size_t size() const { return frames.size(); }
    double dt() const { return 1.0 / config.rate_hz; }
};

}  // namespace ankf::sim
