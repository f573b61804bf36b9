// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ankf/filter/trace.hpp"
#include "ankf/sim/episode.hpp"

namespace ankf::eval {

struct Trajectory {
    std::vector<Eigen::Matrix3d> R;
    std::vector<Eigen::Vector3d> v;
    std::vector<Eigen::Vector3d> p;
    size_t size() const { return p.size(); }
};

Trajectory trajectory_from_truth(const sim::Episode& episode);
Trajectory trajectory_from_trace(const filter::Trace& trace, bool compensated);

struct Segment {
    size_t start = 0;
    size_t end = 0;
};

// Segments of `stride_m` traveled ground-truth distance with 50% overlap:
// starts at each crossing of stride/2 cumulative length. Throws DataError
// when the trajectory is too short for a single segment.
std::vector<Segment> segment_by_distance(const std::vector<Eigen::Vector3d>& gt_positions,
                                         double stride_m = 5.0);

struct REReport {
    double rot_mean = 0.0, rot_std = 0.0;  // deg
    double vel_mean = 0.0, vel_std = 0.0;  // m/s
    double pos_mean = 0.0, pos_std = 0.0;  // m
    size_t segments = 0;
};

// Start-aligned relative errors per segment, reported mean (population std).
REReport relative_errors(const Trajectory& est, const Trajectory& gt,
                         const std::vector<Segment>& segments);

// Per-segment samples, for pooling across episodes.
struct RESamples {
    std::vector<double> rot, vel, pos;
    void append(const Trajectory& est, const Trajectory& gt,
                const std::vector<Segment>& segments);
    REReport report() const;
};

using EstimatorFn = std::function<filter::Trace(const sim::Episode&)>;

// Runs every estimator over every episode (independent runs in parallel)
// and pools relative errors across episodes per estimator.
std::vector<std::pair<std::string, REReport>> run_matrix(
    const std::vector<sim::Episode>& episodes,
    const std::vector<std::pair<std::string, EstimatorFn>>& estimators, double stride_m = 5.0);

}  // namespace ankf::eval
