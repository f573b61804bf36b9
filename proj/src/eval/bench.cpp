// SPDX-License-Identifier: Apache-2.0
#include "ankf/eval/bench.hpp"

#include <algorithm>
#include <chrono>
#include <vector>

namespace ankf::eval {

namespace {

using Clock = std::chrono::steady_clock;

ThroughputReport finalize(std::vector<double>& us) {
    ThroughputReport rep;
    rep.steps = us.size();
    double total = 0.0;
    for (double u : us) total += u;
    rep.mean_us = total / static_cast<double>(us.size());
    rep.steps_per_s = 1e6 / rep.mean_us;
    std::sort(us.begin(), us.end());
    rep.p50_us = us[us.size() / 2];
    rep.p99_us = us[static_cast<size_t>(0.99 * static_cast<double>(us.size() - 1))];
    return rep;
}

}  // namespace

ThroughputReport benchmark_filter(const sim::Episode& episode, const comp::RunnerConfig& config,
                                  size_t min_steps) {
    filter::InEkf ekf(config.noise, episode.model);
    filter::InitialPrior prior{episode.truth[0].R, episode.truth[0].v, episode.truth[0].p};
    filter::FilterState state = ekf.init(prior);
    const double dt = episode.dt();

    std::vector<double> us;
    us.reserve(min_steps);
    size_t k = 0;
    while (us.size() < min_steps) {
        const sim::SensorFrame& f = episode.frames[k % episode.size()];
        const auto t0 = Clock::now();
        state = ekf.predict(state, f.gyro, f.accel, dt);
        std::tie(state, std::ignore) =
            ekf.update_contact(state, f.joint_pos, f.joint_vel, f.contact_est);
        const auto t1 = Clock::now();
        us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
        ++k;
    }
    return finalize(us);
}

ThroughputReport benchmark_attennkf(const sim::Episode& episode, const comp::AttenNc& model,
                                    const comp::RunnerConfig& config, size_t min_steps) {
    filter::InEkf ekf(config.noise, episode.model);
    filter::InitialPrior prior{episode.truth[0].R, episode.truth[0].v, episode.truth[0].p};
    filter::FilterState state = ekf.init(prior);
    const double dt = episode.dt();
    const int H = comp::Dims::kHistory;

    comp::Mat x_hist = comp::Mat::Zero(H, 9);
    comp::Mat dx_hist = comp::Mat::Zero(H, 9);
    comp::Mat slip_hist = comp::Mat::Zero(H, 4);
    int filled = 0;
    comp::CompensatorRuntime runtime(model);

    std::vector<double> us;
    us.reserve(min_steps);
    size_t k = 0;
    while (us.size() < min_steps) {
        const sim::SensorFrame& f = episode.frames[k % episode.size()];
        const auto t0 = Clock::now();
        state = ekf.predict(state, f.gyro, f.accel, dt);
        filter::InternalCorrection corr;
        std::tie(state, corr) =
            ekf.update_contact(state, f.joint_pos, f.joint_vel, f.contact_est);

        const Eigen::Vector4d slip = slip::slip_levels_from_estimate(
            state.rotation(), state.velocity(), f.gyro - state.bias_gyro, f.joint_pos,
            f.joint_vel, f.contact_est, episode.model, config.slip);

        if (filled == H) {
            x_hist.topRows(H - 1) = x_hist.bottomRows(H - 1).eval();
            dx_hist.topRows(H - 1) = dx_hist.bottomRows(H - 1).eval();
            slip_hist.topRows(H - 1) = slip_hist.bottomRows(H - 1).eval();
        }
        const int row = std::min(filled, H - 1);
        const filter::BaseState9 x = filter::extract_base_state(state);
        x_hist.row(row) = x.vec().transpose();
        dx_hist.row(row) = corr.dx.transpose();
        slip_hist.row(row) = slip.transpose();
        if (filled < H) ++filled;

        comp::CompensationDelta delta = runtime.infer(x_hist, dx_hist, slip_hist, filled);
        Eigen::Matrix3d R = lie::exp_so3(x.theta);
        Eigen::Vector3d v = x.v;
        Eigen::Vector3d p = x.p;
        comp::apply_compensation(R, v, p, delta);
        const auto t1 = Clock::now();
        us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
        ++k;
    }
    return finalize(us);
}

}  // namespace ankf::eval
