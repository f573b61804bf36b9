// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "ankf/filter/inekf.hpp"

namespace ankf::filter {

// Per-frame filter output record. x_comp mirrors x for uncompensated runs.
struct TraceFrame {
    double t = 0.0;
    Eigen::Matrix<double, 9, 1> x = Eigen::Matrix<double, 9, 1>::Zero();
    Eigen::Matrix<double, 9, 1> dx = Eigen::Matrix<double, 9, 1>::Zero();
    Eigen::Matrix<double, kStateDim, 1> p_diag = Eigen::Matrix<double, kStateDim, 1>::Zero();
    std::array<bool, sim::kNumLegs> active{};
    Eigen::Vector4d slip = Eigen::Vector4d::Zero();        // estimated, post-update
    Eigen::Vector4d foot_speed = Eigen::Vector4d::Zero();  // estimated world speeds
    Eigen::Matrix<double, 9, 1> x_comp = Eigen::Matrix<double, 9, 1>::Zero();
    bool compensated = false;
};

struct Trace {
    std::vector<TraceFrame> frames;
    size_t size() const { return frames.size(); }
};

}  // namespace ankf::filter
