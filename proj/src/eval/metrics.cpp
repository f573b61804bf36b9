// SPDX-License-Identifier: Apache-2.0
#include "ankf/eval/metrics.hpp"

#include <omp.h>

#include <cmath>

#include "ankf/errors.hpp"
#include "ankf/lie.hpp"

namespace ankf::eval {

Trajectory trajectory_from_truth(const sim::Episode& episode) {
    Trajectory t;
    t.R.reserve(episode.size());
    t.v.reserve(episode.size());
    t.p.reserve(episode.size());
    for (const auto& gt : episode.truth) {
        t.R.push_back(gt.R);
        t.v.push_back(gt.v);
        t.p.push_back(gt.p);
    }
    return t;
}

Trajectory trajectory_from_trace(const filter::Trace& trace, bool compensated) {
    Trajectory t;
    t.R.reserve(trace.size());
    t.v.reserve(trace.size());
    t.p.reserve(trace.size());
    for (const auto& f : trace.frames) {
        const auto& x = compensated ? f.x_comp : f.x;
        t.R.push_back(lie::exp_so3(x.segment<3>(0)));
        t.v.push_back(x.segment<3>(3));
        t.p.push_back(x.segment<3>(6));
    }
    return t;
}

std::vector<Segment> segment_by_distance(const std::vector<Eigen::Vector3d>& gt_positions,
                                         double stride_m) {
    if (gt_positions.size() < 2) throw DataError("segment_by_distance: trajectory too short");
    std::vector<double> cum(gt_positions.size(), 0.0);
    for (size_t k = 1; k < gt_positions.size(); ++k) {
        cum[k] = cum[k - 1] + (gt_positions[k] - gt_positions[k - 1]).norm();
    }
    if (cum.back() < stride_m) {
        throw DataError("segment_by_distance: traveled distance below one segment");
    }

    std::vector<Segment> segments;
    const double half = 0.5 * stride_m;
    size_t k = 0;
    for (int s = 0;; ++s) {
        const double start_len = half * static_cast<double>(s);
        while (k < cum.size() && cum[k] < start_len) ++k;
        if (k >= cum.size()) break;
        const double end_len = cum[k] + stride_m;
        size_t e = k;
        while (e < cum.size() && cum[e] < end_len) ++e;
        if (e >= cum.size()) break;  // not enough distance left
        segments.push_back({k, e});
    }
    if (segments.empty()) throw DataError("segment_by_distance: traveled distance below one segment");
    return segments;
}

namespace {

void mean_std(const std::vector<double>& xs, double* mean, double* stdv) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - m) * (x - m);
    var /= static_cast<double>(xs.size());  // population std
    *mean = m;
    *stdv = std::sqrt(var);
}

}  // namespace

void RESamples::append(const Trajectory& est, const Trajectory& gt,
                       const std::vector<Segment>& segments) {
    if (est.size() != gt.size()) throw DataError("relative_errors: trajectories misaligned");
    for (const Segment& s : segments) {
        const Eigen::Matrix3d rel_gt = gt.R[s.start].transpose() * gt.R[s.end];
        const Eigen::Matrix3d rel_est = est.R[s.start].transpose() * est.R[s.end];
        rot.push_back(lie::log_so3(rel_gt * rel_est.transpose()).norm() * 180.0 / M_PI);

        const Eigen::Vector3d d_gt = gt.R[s.start].transpose() * (gt.p[s.end] - gt.p[s.start]);
        const Eigen::Vector3d d_est =
            est.R[s.start].transpose() * (est.p[s.end] - est.p[s.start]);
        pos.push_back((d_gt - d_est).norm());

        double verr = 0.0;
        for (size_t k = s.start; k <= s.end; ++k) verr += (gt.v[k] - est.v[k]).norm();
        vel.push_back(verr / static_cast<double>(s.end - s.start + 1));
    }
}

REReport RESamples::report() const {
    if (rot.empty()) throw DataError("relative_errors: no segments");
    REReport r;
    r.segments = rot.size();
    mean_std(rot, &r.rot_mean, &r.rot_std);
    mean_std(vel, &r.vel_mean, &r.vel_std);
    mean_std(pos, &r.pos_mean, &r.pos_std);
    return r;
}

REReport relative_errors(const Trajectory& est, const Trajectory& gt,
                         const std::vector<Segment>& segments) {
    RESamples samples;
    samples.append(est, gt, segments);
    return samples.report();
}

std::vector<std::pair<std::string, REReport>> run_matrix(
    const std::vector<sim::Episode>& episodes,
    const std::vector<std::pair<std::string, EstimatorFn>>& estimators, double stride_m) {
    const int n_est = static_cast<int>(estimators.size());
    const int n_ep = static_cast<int>(episodes.size());
    std::vector<filter::Trace> traces(static_cast<size_t>(n_est * n_ep));

#pragma omp parallel for collapse(2) schedule(dynamic)
    for (int e = 0; e < n_est; ++e) {
        for (int i = 0; i < n_ep; ++i) {
            traces[static_cast<size_t>(e * n_ep + i)] =
                estimators[static_cast<size_t>(e)].second(episodes[static_cast<size_t>(i)]);
        }
    }

    std::vector<std::pair<std::string, REReport>> table;
    for (int e = 0; e < n_est; ++e) {
        RESamples pooled;
        for (int i = 0; i < n_ep; ++i) {
            const auto& ep = episodes[static_cast<size_t>(i)];
            const Trajectory gt = trajectory_from_truth(ep);
            const auto segments = segment_by_distance(
                std::vector<Eigen::Vector3d>(gt.p.begin(), gt.p.end()), stride_m);
            const auto& trace = traces[static_cast<size_t>(e * n_ep + i)];
            pooled.append(trajectory_from_trace(trace, trace.frames.front().compensated), gt,
                          segments);
        }
        table.emplace_back(estimators[static_cast<size_t>(e)].first, pooled.report());
    }
    return table;
}

}  // namespace ankf::eval
