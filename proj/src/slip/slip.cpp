// SPDX-License-Identifier: Apache-2.0
#include "ankf/slip/slip.hpp"

#include <algorithm>
#include <cmath>

#include "ankf/errors.hpp"
#include "ankf/lie.hpp"

namespace ankf::slip {

double slip_level(const Eigen::Vector3d& foot_vel_w, bool contact, const SlipParams& params) {
    if (!contact) return 0.0;
    const double speed = foot_vel_w.norm();
    return 1.0 / (1.0 + std::exp(-params.k * (speed - params.v_th)));
}

Eigen::Vector4d slip_levels_from_estimate(const Eigen::Matrix3d& R_est,
                                          const Eigen::Vector3d& v_est,
                                          const Eigen::Vector3d& omega_body,
                                          const Eigen::Matrix<double, 12, 1>& joint_pos,
                                          const Eigen::Matrix<double, 12, 1>& joint_vel,
                                          const std::array<bool, sim::kNumLegs>& contact,
                                          const sim::RobotModel& model, const SlipParams& params) {
    Eigen::Vector4d lv = Eigen::Vector4d::Zero();
    const sim::BaseKinematics base{R_est, v_est, omega_body};
    for (int leg = 0; leg < sim::kNumLegs; ++leg) {
        if (!contact[leg]) continue;
        const Eigen::Vector3d vel = sim::foot_velocity_world(
            base, joint_pos.segment<3>(3 * leg), joint_vel.segment<3>(3 * leg), leg, model);
        lv(leg) = slip_level(vel, true, params);
    }
    return lv;
}

ErrorNorms state_error_norms(const Eigen::Matrix3d& R_est, const Eigen::Vector3d& v_est,
                             const Eigen::Vector3d& p_est, const sim::GroundTruthState& gt) {
    ErrorNorms e;
    e.rot = lie::log_so3(gt.R * R_est.transpose()).norm();
    e.vel = (gt.v - v_est).norm();
    e.pos = (gt.p - p_est).norm();
    return e;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("percentile: empty input");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

CorrelationReport correlation_report(const std::vector<ErrorNorms>& errors,
                                     const std::vector<double>& slip) {
    if (errors.size() != slip.size()) throw DataError("correlation_report: length mismatch");
    if (errors.size() < 100) throw DataError("correlation_report: need at least 100 samples");

    const size_t n = errors.size();
    std::vector<double> rot(n), vel(n), pos(n);
    for (size_t i = 0; i < n; ++i) {
        rot[i] = errors[i].rot;
        vel[i] = errors[i].vel;
        pos[i] = errors[i].pos;
    }

    CorrelationReport rep;
    rep.p95_rot = percentile(rot, 0.95);
    rep.p95_vel = percentile(vel, 0.95);
    rep.p95_pos = percentile(pos, 0.95);
    const double nr = rep.p95_rot > 0 ? rep.p95_rot : 1.0;
    const double nv = rep.p95_vel > 0 ? rep.p95_vel : 1.0;
    const double np = rep.p95_pos > 0 ? rep.p95_pos : 1.0;

    std::vector<double> scalar(n);
    for (size_t i = 0; i < n; ++i) {
        const double a = rot[i] / nr, b = vel[i] / nv, c = pos[i] / np;
        scalar[i] = std::sqrt(a * a + b * b + c * c);
    }

    double mean_s = 0.0, mean_e = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mean_s += slip[i];
        mean_e += scalar[i];
    }
    mean_s /= static_cast<double>(n);
    mean_e /= static_cast<double>(n);

    double cov = 0.0, var_s = 0.0, var_e = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double ds = slip[i] - mean_s;
        const double de = scalar[i] - mean_e;
        cov += ds * de;
        var_s += ds * ds;
        var_e += de * de;
    }
    if (var_s <= 0.0) throw DataError("correlation_report: slip has zero variance");
    rep.pearson_r = var_e > 0.0 ? cov / std::sqrt(var_s * var_e) : 0.0;

    std::array<double, 5> sum{}, sum2{};
    for (size_t i = 0; i < n; ++i) {
        int b = static_cast<int>(std::floor(slip[i] / 0.2));
        b = std::clamp(b, 0, 4);
        sum[b] += scalar[i];
        sum2[b] += scalar[i] * scalar[i];
        ++rep.bin_counts[b];
    }
    for (int b = 0; b < 5; ++b) {
        if (rep.bin_counts[b] == 0) continue;
        const double c = static_cast<double>(rep.bin_counts[b]);
        rep.bin_means[b] = sum[b] / c;
        rep.bin_stds[b] = std::sqrt(std::max(0.0, sum2[b] / c - rep.bin_means[b] * rep.bin_means[b]));
    }
    return rep;
}

}  // namespace ankf::slip
