// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>

#include "ankf/lie.hpp"
#include "ankf/sim/episode.hpp"
#include "ankf/sim/kinematics.hpp"

namespace ankf::filter {

inline constexpr int kStateDim = 27;  // [theta v p d1..d4 bg ba]
using Covariance = Eigen::Matrix<double, kStateDim, kStateDim>;

// Block offsets into the error state.
inline constexpr int kThetaIdx = 0;
inline constexpr int kVelIdx = 3;
inline constexpr int kPosIdx = 6;
inline constexpr int kFootIdx = 9;  // + 3*leg
inline constexpr int kBgIdx = 21;
inline constexpr int kBaIdx = 24;

struct NoiseParams {
    double gyro_std = 2e-3;          // rad/s/sqrt(Hz) process
    double accel_std = 2e-2;         // m/s^2/sqrt(Hz)
    double gyro_bias_std = 1e-5;     // rad/s per sqrt(s)
    double accel_bias_std = 1e-4;    // m/s^2 per sqrt(s)
    double contact_std = 1e-3;       // m/sqrt(s) foot random walk
    double meas_std = 5e-3;          // m, forward-kinematic position
};

struct PriorStd {
    double rot = 1e-3;
    double vel = 1e-2;
    double pos = 1e-3;
    double gyro_bias = 1e-4;
    double accel_bias = 1e-3;
};

// Variance pinned on feet that are not in contact.
inline constexpr double kInactiveFootVar = 1e4;

struct BaseState9 {
    Eigen::Vector3d theta = Eigen::Vector3d::Zero();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    Eigen::Vector3d p = Eigen::Vector3d::Zero();

    Eigen::Matrix<double, 9, 1> vec() const {
        Eigen::Matrix<double, 9, 1> x;
        x << theta, v, p;
        return x;
    }
};

// Base-state change induced by one contact update.
struct InternalCorrection {
    Eigen::Matrix<double, 9, 1> dx = Eigen::Matrix<double, 9, 1>::Zero();
};

struct FilterState {
    lie::GroupMatrix Z = lie::GroupMatrix::Identity();
    std::array<bool, sim::kNumLegs> active{false, false, false, false};
    Eigen::Vector3d bias_gyro = Eigen::Vector3d::Zero();
    Eigen::Vector3d bias_accel = Eigen::Vector3d::Zero();
    Covariance P = Covariance::Identity();

    Eigen::Matrix3d rotation() const { return Z.topLeftCorner<3, 3>(); }
    Eigen::Vector3d velocity() const { return Z.block<3, 1>(0, 3); }
    Eigen::Vector3d position() const { return Z.block<3, 1>(0, 4); }
    Eigen::Vector3d foot(int leg) const { return Z.block<3, 1>(0, 5 + leg); }
};

struct SlipRejectionConfig {
    double lv_threshold = 0.5;
    double inflation_factor = 100.0;
    bool reject_entirely = false;  // "infinite inflation": skip the foot
};

struct InitialPrior {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
};

class InEkf {
public:
    InEkf(const NoiseParams& noise, const sim::RobotModel& model, const PriorStd& prior_std = {});

    FilterState init(const InitialPrior& prior) const;

    // IMU propagation on SE_6(3); right-invariant error linearization.
    FilterState predict(const FilterState& state, const Eigen::Vector3d& gyro,
                        const Eigen::Vector3d& accel, double dt) const;

    // Stacked forward-kinematic update over active stance feet. New contacts
    // are initialized from FK and start measuring on the next call.
    std::pair<FilterState, InternalCorrection> update_contact(
        const FilterState& state, const Eigen::Matrix<double, 12, 1>& joint_pos,
        const Eigen::Matrix<double, 12, 1>& joint_vel,
        const std::array<bool, sim::kNumLegs>& contact_est) const;

    // Slip-rejection baseline: per-foot measurement variance inflation.
    std::pair<FilterState, InternalCorrection> update_contact_sr(
        const FilterState& state, const Eigen::Matrix<double, 12, 1>& joint_pos,
        const Eigen::Matrix<double, 12, 1>& joint_vel,
        const std::array<bool, sim::kNumLegs>& contact_est,
        const Eigen::Vector4d& slip_levels, const SlipRejectionConfig& sr) const;

    const NoiseParams& noise() const { return noise_; }
    const sim::RobotModel& model() const { return model_; }

private:
    std::pair<FilterState, InternalCorrection> update_impl(
        const FilterState& state, const Eigen::Matrix<double, 12, 1>& joint_pos,
        const std::array<bool, sim::kNumLegs>& contact_est,
        const std::optional<Eigen::Vector4d>& slip_levels, const SlipRejectionConfig& sr) const;

    NoiseParams noise_;
    sim::RobotModel model_;
    PriorStd prior_std_;
    Eigen::Vector3d gravity_{0.0, 0.0, -9.81};
};

BaseState9 extract_base_state(const FilterState& state);

}  // namespace ankf::filter
