// SPDX-License-Identifier: Apache-2.0
#include "ankf/filter/inekf.hpp"

#include <cmath>

#include "ankf/errors.hpp"

namespace ankf::filter {

using lie::GroupMatrix;
using lie::hat3;

namespace {

void symmetrize(Covariance& P) { P = (0.5 * (P + P.transpose())).eval(); }

void decouple_foot(Covariance& P, int leg) {
    const int i = kFootIdx + 3 * leg;
    P.block<3, kStateDim>(i, 0).setZero();
    P.block<kStateDim, 3>(0, i).setZero();
    P.block<3, 3>(i, i) = kInactiveFootVar * Eigen::Matrix3d::Identity();
}

}  // namespace

InEkf::InEkf(const NoiseParams& noise, const sim::RobotModel& model, const PriorStd& prior_std)
    : noise_(noise), model_(model), prior_std_(prior_std) {}

FilterState InEkf::init(const InitialPrior& prior) const {
    FilterState s;
    s.Z.topLeftCorner<3, 3>() = prior.R;
    s.Z.block<3, 1>(0, 3) = prior.v;
    s.Z.block<3, 1>(0, 4) = prior.p;
    s.P.setZero();
    auto set_block = [&](int idx, double std) {
        s.P.block<3, 3>(idx, idx) = std * std * Eigen::Matrix3d::Identity();
    };
    set_block(kThetaIdx, prior_std_.rot);
    set_block(kVelIdx, prior_std_.vel);
    set_block(kPosIdx, prior_std_.pos);
    set_block(kBgIdx, prior_std_.gyro_bias);
    set_block(kBaIdx, prior_std_.accel_bias);
    for (int leg = 0; leg < sim::kNumLegs; ++leg) {
        s.Z.block<3, 1>(0, 5 + leg) = prior.p;  // placeholder until first contact
        decouple_foot(s.P, leg);
    }
    return s;
}

FilterState InEkf::predict(const FilterState& state, const Eigen::Vector3d& gyro,
                           const Eigen::Vector3d& accel, double dt) const {
    if (!gyro.allFinite() || !accel.allFinite() || !(dt > 0.0) || !std::isfinite(dt)) {
        throw NumericalError("predict: non-finite input");
    }

    const Eigen::Vector3d w = gyro - state.bias_gyro;
    const Eigen::Vector3d a = accel - state.bias_accel;
    const Eigen::Vector3d phi = w * dt;
    const Eigen::Matrix3d G0 = lie::gamma0(phi);
    const Eigen::Matrix3d G1 = lie::gamma1(phi);
    const Eigen::Matrix3d G2 = lie::gamma2(phi);

    const Eigen::Matrix3d R = state.rotation();
    const Eigen::Vector3d v = state.velocity();
    const Eigen::Vector3d p = state.position();

    FilterState out = state;
    out.Z.topLeftCorner<3, 3>() = R * G0;
    out.Z.block<3, 1>(0, 3) = v + (R * G1 * a + gravity_) * dt;
    out.Z.block<3, 1>(0, 4) = p + v * dt + (R * G2 * a + 0.5 * gravity_) * dt * dt;

    // Right-invariant (world-centric) state transition.
    const double dt2 = dt * dt;
    const Eigen::Matrix3d gx = hat3(gravity_);
    const Eigen::Matrix3d RG1dt = R * G1 * dt;
    const Eigen::Matrix3d RG2dt2 = R * G2 * dt2;
    const Eigen::Matrix3d I3 = Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d ax = hat3(a);
    // Second-order-in-dt bias coupling; exact up to O((|w| dt)^2) terms.
    const Eigen::Matrix3d Phi25L = 0.5 * ax * dt2;
    const Eigen::Matrix3d Phi35L = (1.0 / 6.0) * ax * dt2 * dt;

    Covariance Phi = Covariance::Identity();
    Phi.block<3, 3>(kVelIdx, kThetaIdx) = gx * dt;
    Phi.block<3, 3>(kPosIdx, kThetaIdx) = 0.5 * gx * dt2;
    Phi.block<3, 3>(kPosIdx, kVelIdx) = I3 * dt;
    Phi.block<3, 3>(kThetaIdx, kBgIdx) = -RG1dt;
    Phi.block<3, 3>(kVelIdx, kBgIdx) =
        -hat3(v + RG1dt * a + gravity_ * dt) * RG1dt + R * G0 * Phi25L;
    Phi.block<3, 3>(kPosIdx, kBgIdx) =
        -hat3(p + v * dt + RG2dt2 * a + 0.5 * gravity_ * dt2) * RG1dt + R * G0 * Phi35L;
    Phi.block<3, 3>(kVelIdx, kBaIdx) = -RG1dt;
    Phi.block<3, 3>(kPosIdx, kBaIdx) = -RG2dt2;
    for (int leg = 0; leg < sim::kNumLegs; ++leg) {
        if (state.active[leg]) {
            Phi.block<3, 3>(kFootIdx + 3 * leg, kBgIdx) = -hat3(state.foot(leg)) * RG1dt;
        }
    }

    // Continuous process noise, transported by the adjoint for the
    // right-invariant error, then discretized.
    Covariance Qc = Covariance::Zero();
    Qc.block<3, 3>(kThetaIdx, kThetaIdx) = noise_.gyro_std * noise_.gyro_std * I3;
    Qc.block<3, 3>(kVelIdx, kVelIdx) = noise_.accel_std * noise_.accel_std * I3;
    for (int leg = 0; leg < sim::kNumLegs; ++leg) {
        if (state.active[leg]) {
            Qc.block<3, 3>(kFootIdx + 3 * leg, kFootIdx + 3 * leg) =
                noise_.contact_std * noise_.contact_std * I3;
        }
    }
    Qc.block<3, 3>(kBgIdx, kBgIdx) = noise_.gyro_bias_std * noise_.gyro_bias_std * I3;
    Qc.block<3, 3>(kBaIdx, kBaIdx) = noise_.accel_bias_std * noise_.accel_bias_std * I3;

    Covariance G = Covariance::Identity();
    G.topLeftCorner<lie::kTangentDim, lie::kTangentDim>() = lie::adjoint_sek3(state.Z);
    const Covariance PhiG = Phi * G;
    const Covariance Qd = PhiG * Qc * PhiG.transpose() * dt;

    out.P = Phi * state.P * Phi.transpose() + Qd;
    symmetrize(out.P);
    return out;
}

std::pair<FilterState, InternalCorrection> InEkf::update_contact(
    const FilterState& state, const Eigen::Matrix<double, 12, 1>& joint_pos,
    const Eigen::Matrix<double, 12, 1>& joint_vel,
    const std::array<bool, sim::kNumLegs>& contact_est) const {
    (void)joint_vel;
    return update_impl(state, joint_pos, contact_est, std::nullopt, SlipRejectionConfig{});
}

std::pair<FilterState, InternalCorrection> InEkf::update_contact_sr(
    const FilterState& state, const Eigen::Matrix<double, 12, 1>& joint_pos,
    const Eigen::Matrix<double, 12, 1>& joint_vel,
    const std::array<bool, sim::kNumLegs>& contact_est, const Eigen::Vector4d& slip_levels,
    const SlipRejectionConfig& sr) const {
    (void)joint_vel;
    return update_impl(state, joint_pos, contact_est, slip_levels, sr);
}

std::pair<FilterState, InternalCorrection> InEkf::update_impl(
    const FilterState& state, const Eigen::Matrix<double, 12, 1>& joint_pos,
    const std::array<bool, sim::kNumLegs>& contact_est,
    const std::optional<Eigen::Vector4d>& slip_levels, const SlipRejectionConfig& sr) const {
    FilterState out = state;
    const Eigen::Matrix3d R = state.rotation();
    const Eigen::Vector3d p = state.position();
    const double meas_var = noise_.meas_std * noise_.meas_std;

    // Contact transitions.
    std::array<bool, sim::kNumLegs> measuring{false, false, false, false};
    for (int leg = 0; leg < sim::kNumLegs; ++leg) {
        const Eigen::Vector3d fk =
            sim::leg_forward_kinematics(joint_pos.segment<3>(3 * leg), leg, model_);
        if (contact_est[leg] && !state.active[leg]) {
            out.Z.block<3, 1>(0, 5 + leg) = p + R * fk;
            out.active[leg] = true;
            const int i = kFootIdx + 3 * leg;
            out.P.block<3, kStateDim>(i, 0) = out.P.block<3, kStateDim>(kPosIdx, 0);
            out.P.block<kStateDim, 3>(0, i) = out.P.block<kStateDim, 3>(0, kPosIdx);
            out.P.block<3, 3>(i, i) =
                out.P.block<3, 3>(kPosIdx, kPosIdx) + meas_var * Eigen::Matrix3d::Identity();
        } else if (!contact_est[leg] && state.active[leg]) {
            out.active[leg] = false;
            decouple_foot(out.P, leg);
        } else if (contact_est[leg] && state.active[leg]) {
            measuring[leg] = true;
        }
    }

    // Assemble the stacked right-invariant observation.
    Eigen::Matrix<double, Eigen::Dynamic, kStateDim, 0, 12, kStateDim> H(0, kStateDim);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 12, 12> N(0, 0);
    Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 12, 1> z(0);
    for (int leg = 0; leg < sim::kNumLegs; ++leg) {
        if (!measuring[leg]) continue;
        double scale = 1.0;
        if (slip_levels && (*slip_levels)(leg) > sr.lv_threshold) {
            if (sr.reject_entirely) continue;
            scale = sr.inflation_factor;
        }
        const Eigen::Vector3d fk =
            sim::leg_forward_kinematics(joint_pos.segment<3>(3 * leg), leg, model_);
        const int row = static_cast<int>(H.rows());
        H.conservativeResize(row + 3, Eigen::NoChange);
        H.block<3, kStateDim>(row, 0).setZero();
        H.block<3, 3>(row, kPosIdx) = -Eigen::Matrix3d::Identity();
        H.block<3, 3>(row, kFootIdx + 3 * leg) = Eigen::Matrix3d::Identity();
        N.conservativeResize(row + 3, row + 3);
        N.block(row, 0, 3, row).setZero();
        N.block(0, row, row, 3).setZero();
        N.block<3, 3>(row, row) = scale * meas_var * Eigen::Matrix3d::Identity();
        z.conservativeResize(row + 3);
        z.segment<3>(row) = R * fk + p - out.foot(leg);
    }

    InternalCorrection corr;
    if (H.rows() == 0) return {out, corr};

    const Eigen::MatrixXd PHt = out.P * H.transpose();
    Eigen::MatrixXd S = H * PHt + N;
    S = 0.5 * (S + S.transpose()).eval();

    {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > 1e12) {
            throw NumericalError("update_contact: innovation covariance is ill-conditioned");
        }
    }

    const Eigen::MatrixXd K = PHt * S.inverse();
    const Eigen::VectorXd delta = K * z;

    const Eigen::Matrix3d R_prior = out.rotation();
    const Eigen::Vector3d v_prior = out.velocity();
    const Eigen::Vector3d p_prior = out.position();

    const GroupMatrix dX = lie::exp_sek3(delta.head<lie::kTangentDim>());
    out.Z = dX * out.Z;  // right-invariant group action
    out.bias_gyro += delta.segment<3>(kBgIdx);
    out.bias_accel += delta.segment<3>(kBaIdx);

    const Covariance IKH = Covariance::Identity() - K * H;
    out.P = IKH * out.P * IKH.transpose() + K * N * K.transpose();
    symmetrize(out.P);

    corr.dx.segment<3>(0) = lie::log_so3(out.rotation() * R_prior.transpose());
    corr.dx.segment<3>(3) = out.velocity() - v_prior;
    corr.dx.segment<3>(6) = out.position() - p_prior;
    return {out, corr};
}

BaseState9 extract_base_state(const FilterState& state) {
    BaseState9 x;
    x.theta = lie::log_so3(state.rotation());
    x.v = state.velocity();
    x.p = state.position();
    return x;
}

}  // namespace ankf::filter
