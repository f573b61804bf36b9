// SPDX-License-Identifier: Apache-2.0
#include "ankf/comp/runner.hpp"

#include <cmath>

#include "ankf/errors.hpp"
#include "ankf/lie.hpp"

namespace ankf::comp {

namespace {

Eigen::Vector4d estimated_foot_speeds(const filter::FilterState& state,
                                      const sim::SensorFrame& f, const sim::RobotModel& model) {
    Eigen::Vector4d speeds;
    const sim::BaseKinematics base{state.rotation(), state.velocity(),
                                   f.gyro - state.bias_gyro};
    for (int leg = 0; leg < sim::kNumLegs; ++leg) {
        speeds(leg) = sim::foot_velocity_world(base, f.joint_pos.segment<3>(3 * leg),
                                               f.joint_vel.segment<3>(3 * leg), leg, model)
                          .norm();
    }
    return speeds;
}

// The shared predict/update loop; per-frame hook sees the finished trace row.
template <typename Hook>
filter::Trace filter_loop(const sim::Episode& episode, Estimator estimator,
                          const RunnerConfig& config, Hook&& hook) {
    const double dt = episode.dt();
    filter::InEkf ekf(config.noise, episode.model);

    filter::InitialPrior prior;
    prior.R = episode.truth.front().R;
    prior.v = episode.truth.front().v;
    prior.p = episode.truth.front().p;
    filter::FilterState state = ekf.init(prior);

    filter::Trace trace;
    trace.frames.resize(episode.size());
    for (size_t k = 0; k < episode.size(); ++k) {
        const sim::SensorFrame& f = episode.frames[k];
        state = ekf.predict(state, f.gyro, f.accel, dt);

        filter::InternalCorrection corr;
        if (estimator == Estimator::kSlipRejection) {
            // Gate on slip evaluated at the predicted (pre-update) state.
            const Eigen::Vector4d lv_pre = slip::slip_levels_from_estimate(
                state.rotation(), state.velocity(), f.gyro - state.bias_gyro, f.joint_pos,
                f.joint_vel, f.contact_est, episode.model, config.slip);
            std::tie(state, corr) = ekf.update_contact_sr(state, f.joint_pos, f.joint_vel,
                                                          f.contact_est, lv_pre, config.sr);
        } else {
            std::tie(state, corr) =
                ekf.update_contact(state, f.joint_pos, f.joint_vel, f.contact_est);
        }

        filter::TraceFrame& out = trace.frames[k];
        out.t = f.t;
        out.x = filter::extract_base_state(state).vec();
        out.dx = corr.dx;
        out.p_diag = state.P.diagonal();
        out.active = state.active;
        out.foot_speed = estimated_foot_speeds(state, f, episode.model);
        for (int leg = 0; leg < sim::kNumLegs; ++leg) {
            out.slip(leg) = f.contact_est[leg]
                                ? slip::slip_level(Eigen::Vector3d(out.foot_speed(leg), 0, 0),
                                                   true, config.slip)
                                : 0.0;
        }
        out.x_comp = out.x;
        out.compensated = false;
        hook(k, out);
    }
    return trace;
}

}  // namespace

filter::Trace run_filter(const sim::Episode& episode, Estimator estimator,
                         const RunnerConfig& config) {
    if (estimator == Estimator::kAttenNkf) {
        throw DataError("run_filter: AttenNKF requires a trained model; use run_attennkf");
    }
    return filter_loop(episode, estimator, config, [](size_t, filter::TraceFrame&) {});
}

CompensationDelta infer_compensation(const AttenNc& model, const Mat& x_hist,
                                     const Mat& dx_hist, const Mat& slip_hist,
                                     int valid_count) {
    const int H = Dims::kHistory;
    if (x_hist.rows() != H || dx_hist.rows() != H || slip_hist.rows() != H ||
        x_hist.cols() != 9 || dx_hist.cols() != 9 || slip_hist.cols() != 4) {
        throw DataError("infer_compensation: histories must be H x {9,9,4}");
    }
    CompensationDelta delta;
    if (valid_count < H) return delta;  // warm-up mask

    const Normalization& n = model.norm;
    Mat x_in(H, 18);
    x_in.leftCols(9) =
        (x_hist.rowwise() - n.mean_x.transpose()).array().rowwise() /
        n.std_x.transpose().array();
    x_in.rightCols(9) =
        (dx_hist.rowwise() - n.mean_dx.transpose()).array().rowwise() /
        n.std_dx.transpose().array();
    const Eigen::VectorXd& slip_mean = model.uses_foot_speed() ? n.mean_speed : n.mean_slip;
    const Eigen::VectorXd& slip_std = model.uses_foot_speed() ? n.std_speed : n.std_slip;
    const Mat slip_std_win = ((slip_hist.rowwise() - slip_mean.transpose()).array().rowwise() /
                              slip_std.transpose().array())
                                 .matrix();

    const Mat z_inekf = neural::plain_encoder(model.enc_inekf, x_in);
    Mat z_query;
    if (model.uses_slip_input()) z_query = model.plain_slip_latent(slip_std_win);
    const Mat z_comp = model.plain_comp_latent(z_query, z_inekf);
    const Mat dec_seq = neural::plain_encoder(model.dec, z_comp);

    Eigen::Matrix<double, 9, 1> e_std = dec_seq.row(H - 1).transpose();
    Eigen::Matrix<double, 9, 1> e =
        e_std.cwiseProduct(n.std_err) + n.mean_err;  // de-standardize
    if (!e.allFinite()) throw NumericalError("infer_compensation: non-finite output");

    delta.dtheta = e.segment<3>(0);
    delta.dv = e.segment<3>(3);
    delta.dp = e.segment<3>(6);
    // Type invariant: rotation residual stays on the principal branch.
    const double rot_norm = delta.dtheta.norm();
    if (rot_norm > M_PI) delta.dtheta *= M_PI / rot_norm;
    return delta;
}

void apply_compensation(Eigen::Matrix3d& R, Eigen::Vector3d& v, Eigen::Vector3d& p,
                        const CompensationDelta& delta) {
    R = lie::exp_so3(delta.dtheta) * R;
    v += delta.dv;
    p += delta.dp;
}

CompensatorRuntime::CompensatorRuntime(const AttenNc& model) : model_(&model) {
    enc_inekf_.bind(model.enc_inekf);
    if (model.has_slip_encoder()) enc_slip_.bind(model.enc_slip);
    dec_.bind(model.dec);
    const int H = Dims::kHistory;
    x_in_.resize(H, 18);
    slip_std_.resize(H, 4);
}

CompensationDelta CompensatorRuntime::infer(const Mat& x_hist, const Mat& dx_hist,
                                            const Mat& slip_hist, int valid_count) {
    const int H = Dims::kHistory;
    CompensationDelta delta;
    if (valid_count < H) return delta;  // warm-up mask
    const AttenNc& m = *model_;
    const Normalization& n = m.norm;

    x_in_.leftCols(9) = (x_hist.rowwise() - n.mean_x.transpose()).array().rowwise() /
                        n.std_x.transpose().array();
    x_in_.rightCols(9) = (dx_hist.rowwise() - n.mean_dx.transpose()).array().rowwise() /
                         n.std_dx.transpose().array();
    const Eigen::VectorXd& slip_mean = m.uses_foot_speed() ? n.mean_speed : n.mean_slip;
    const Eigen::VectorXd& slip_std = m.uses_foot_speed() ? n.std_speed : n.std_slip;
    slip_std_ = (slip_hist.rowwise() - slip_mean.transpose()).array().rowwise() /
                slip_std.transpose().array();

    const Mat& z_inekf = enc_inekf_.run(x_in_);
    const Mat* query = &z_inekf;
    if (m.uses_slip_input()) {
        if (m.has_slip_lift()) {
            z_query_.resize(H, m.slip_lift.W.cols());
            z_query_.noalias() = slip_std_ * m.slip_lift.W;
            z_query_.rowwise() += m.slip_lift.b.row(0);
            query = &z_query_;
        } else {
            z_query_ = enc_slip_.run(slip_std_);
            query = &z_query_;
        }
    }

    if (m.has_attention()) {
        const Mat& q_src = (m.variant == Variant::kSelfAtten) ? z_inekf : *query;
        const Mat Q = q_src * m.attn.W_q;
        const Mat K = z_inekf * m.attn.W_k;
        const Mat V = z_inekf * m.attn.W_v;
        Mat S = Q * K.transpose() / std::sqrt(static_cast<double>(m.attn.W_q.cols()));
        for (int r = 0; r < S.rows(); ++r) {
            const double mx = S.row(r).maxCoeff();
            S.row(r) = (S.row(r).array() - mx).exp();
            S.row(r) /= S.row(r).sum();
        }
        ctx_.noalias() = S * V;
    } else {
        ctx_.resize(H, query->cols() + z_inekf.cols());
        ctx_ << *query, z_inekf;
    }

    mlp_hidden_.noalias() = ctx_ * m.mlp.l1.W;
    mlp_hidden_.rowwise() += m.mlp.l1.b.row(0);
    mlp_hidden_ = neural::stable_tanh(mlp_hidden_.array()).matrix();
    z_comp_.noalias() = mlp_hidden_ * m.mlp.l2.W;
    z_comp_.rowwise() += m.mlp.l2.b.row(0);

    const Mat& dec_seq = dec_.run(z_comp_);
    Eigen::Matrix<double, 9, 1> e =
        dec_seq.row(H - 1).transpose().cwiseProduct(n.std_err) + n.mean_err;
    if (!e.allFinite()) throw NumericalError("CompensatorRuntime: non-finite output");
    delta.dtheta = e.segment<3>(0);
    delta.dv = e.segment<3>(3);
    delta.dp = e.segment<3>(6);
    const double rot_norm = delta.dtheta.norm();
    if (rot_norm > M_PI) delta.dtheta *= M_PI / rot_norm;
    return delta;
}

filter::Trace run_attennkf(const sim::Episode& episode, const AttenNc& model,
                           const RunnerConfig& config) {
    const int H = Dims::kHistory;
    Mat x_hist = Mat::Zero(H, 9);
    Mat dx_hist = Mat::Zero(H, 9);
    Mat slip_hist = Mat::Zero(H, 4);
    int filled = 0;
    CompensatorRuntime runtime(model);

    auto hook = [&](size_t, filter::TraceFrame& out) {
        // Shift the rolling histories up and append the newest frame.
        if (filled == H) {
            x_hist.topRows(H - 1) = x_hist.bottomRows(H - 1).eval();
            dx_hist.topRows(H - 1) = dx_hist.bottomRows(H - 1).eval();
            slip_hist.topRows(H - 1) = slip_hist.bottomRows(H - 1).eval();
        }
        const int row = std::min(filled, H - 1);
        x_hist.row(row) = out.x.transpose();
        dx_hist.row(row) = out.dx.transpose();
        slip_hist.row(row) = model.uses_foot_speed() ? out.foot_speed.transpose()
                                                     : out.slip.transpose();
        if (filled < H) ++filled;

        CompensationDelta delta = runtime.infer(x_hist, dx_hist, slip_hist, filled);
        if (config.clamp_rot > 0.0 && delta.dtheta.norm() > config.clamp_rot) {
            delta.dtheta *= config.clamp_rot / delta.dtheta.norm();
        }
        if (config.clamp_pos > 0.0 && delta.dp.norm() > config.clamp_pos) {
            delta.dp *= config.clamp_pos / delta.dp.norm();
        }

        Eigen::Matrix3d R = lie::exp_so3(out.x.segment<3>(0));
        Eigen::Vector3d v = out.x.segment<3>(3);
        Eigen::Vector3d p = out.x.segment<3>(6);
        apply_compensation(R, v, p, delta);
        out.x_comp.segment<3>(0) = lie::log_so3(R);
        out.x_comp.segment<3>(3) = v;
        out.x_comp.segment<3>(6) = p;
        out.compensated = true;
    };
    return filter_loop(episode, Estimator::kInEkf, config, hook);
}

}  // namespace ankf::comp
