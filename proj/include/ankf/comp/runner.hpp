// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ankf/comp/attennc.hpp"
#include "ankf/filter/inekf.hpp"
#include "ankf/filter/trace.hpp"
#include "ankf/neural/fast.hpp"
#include "ankf/slip/slip.hpp"

namespace ankf::comp {

enum class Estimator {
    kInEkf,
    kSlipRejection,
    kAttenNkf,
};

struct RunnerConfig {
    filter::NoiseParams noise;
    slip::SlipParams slip;
    filter::SlipRejectionConfig sr;
    double clamp_rot = 0.2;  // rad per step; <= 0 disables
    double clamp_pos = 0.2;  // m per step; <= 0 disables
};

struct CompensationDelta {
    Eigen::Vector3d dtheta = Eigen::Vector3d::Zero();
    Eigen::Vector3d dv = Eigen::Vector3d::Zero();
    Eigen::Vector3d dp = Eigen::Vector3d::Zero();
};

// Compensation from raw (unstandardized) histories of length exactly H.
// Histories with valid_count < H are warm-up: the delta is masked to zero.
// Straightforward reference path; CompensatorRuntime is the fast equivalent.
CompensationDelta infer_compensation(const AttenNc& model, const Mat& x_hist,
                                     const Mat& dx_hist, const Mat& slip_hist, int valid_count);

// Packed-weight, allocation-free inference for the per-frame hot loop.
// Agrees with infer_compensation to GEMM rounding.
class CompensatorRuntime {
public:
    explicit CompensatorRuntime(const AttenNc& model);
    CompensationDelta infer(const Mat& x_hist, const Mat& dx_hist, const Mat& slip_hist,
                            int valid_count);

private:
    const AttenNc* model_;
    neural::EncoderFast enc_inekf_, enc_slip_, dec_;
    Mat x_in_, slip_std_, z_query_, z_comp_in_, ctx_, mlp_hidden_, z_comp_;
};

// Eq.-style post-update correction: left rotation action, additive v/p.
// The filter state and covariance are untouched by design.
void apply_compensation(Eigen::Matrix3d& R, Eigen::Vector3d& v, Eigen::Vector3d& p,
                        const CompensationDelta& delta);

// Runs the filter over an episode and records the per-frame trace.
// Slip levels in the trace are computed from the posterior estimate.
filter::Trace run_filter(const sim::Episode& episode, Estimator estimator,
                         const RunnerConfig& config);

// Full pipeline: predict, contact update, slip from the estimated state,
// rolling histories, compensation of the reported mean. The filter stream
// is bit-identical to run_filter with the vanilla estimator.
filter::Trace run_attennkf(const sim::Episode& episode, const AttenNc& model,
                           const RunnerConfig& config);

}  // namespace ankf::comp
