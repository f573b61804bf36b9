// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ankf/neural/checkpoint.hpp"
#include "ankf/neural/layers.hpp"

namespace ankf::comp {

using neural::Mat;

// Architecture constants: GRU autoencoder sizes by input feature
// (slip 64/16/2, filter value 128/32/2, state error 128/32/2), history 50,
// single-head attention at d_h = 32, MLP 64 wide, d_z = 32.
struct Dims {
    static constexpr int kHistory = 50;
    static constexpr int kInekfIn = 18;  // [x; dx]
    static constexpr int kSlipIn = 4;
    static constexpr int kErrIn = 9;
    static constexpr int kInekfHidden = 128;
    static constexpr int kInekfLatent = 32;
    static constexpr int kSlipHidden = 64;
    static constexpr int kSlipLatent = 16;
    static constexpr int kErrHidden = 128;
    static constexpr int kErrLatent = 32;
    static constexpr int kLayers = 2;
    static constexpr int kAttnDim = 32;
    static constexpr int kMlpHidden = 64;
    static constexpr int kCompLatent = 32;
};

enum class Variant {
    kProposed,
    kNoAtten,
    kSelfAtten,
    kNoTeach,
    kEndToEnd,
    kRawFootVelocity,
    kExplicitSlip,
};

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Per-channel standardization statistics (train-set mean/std).
struct Normalization {
    Eigen::VectorXd mean_x = Eigen::VectorXd::Zero(9);
    Eigen::VectorXd std_x = Eigen::VectorXd::Ones(9);
    Eigen::VectorXd mean_dx = Eigen::VectorXd::Zero(9);
    Eigen::VectorXd std_dx = Eigen::VectorXd::Ones(9);
    Eigen::VectorXd mean_slip = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd std_slip = Eigen::VectorXd::Ones(4);
    Eigen::VectorXd mean_speed = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd std_speed = Eigen::VectorXd::Ones(4);
    Eigen::VectorXd mean_err = Eigen::VectorXd::Zero(9);
    Eigen::VectorXd std_err = Eigen::VectorXd::Ones(9);
};

// Stage-1 sequence autoencoders (encoder to latent, decoder back).
struct Autoencoders {
    neural::GruEncoder enc_slip, enc_inekf, enc_err;
    neural::GruDecoder dec_slip, dec_inekf, dec_err;

    void init(uint64_t seed);
    void collect(neural::ParamSet& out);
};

// The slip-conditioned compensator network.
struct AttenNc {
    Variant variant = Variant::kProposed;
    neural::GruEncoder enc_inekf;    // frozen after stage 1 (except end-to-end)
    neural::GruEncoder enc_slip;     // absent for SelfAtten / ExplicitSlip
    neural::LinearParams slip_lift;  // ExplicitSlip: 4 -> 16 query lift
    neural::AttentionParams attn;    // absent for NoAtten
    neural::MlpParams mlp;
    neural::GruDecoder dec;          // compensation decoder, 32 -> 128x2 -> 9
    Normalization norm;

    bool has_slip_encoder() const {
        return variant != Variant::kSelfAtten && variant != Variant::kExplicitSlip;
    }
    bool has_attention() const { return variant != Variant::kNoAtten; }
    bool has_slip_lift() const { return variant == Variant::kExplicitSlip; }
    bool uses_foot_speed() const { return variant == Variant::kRawFootVelocity; }
    bool uses_slip_input() const { return variant != Variant::kSelfAtten; }

    // Fresh attention/MLP on top of copies of the stage-1 encoders/decoder.
    static AttenNc assemble(Variant variant, const Autoencoders& stage1, uint64_t seed);
    // Everything from scratch (end-to-end training).
    static AttenNc from_scratch(Variant variant, uint64_t seed);

    // All existing parameters, for checkpoints and the name-diff invariant.
    void collect_all(neural::ParamSet& out);
    // Stage-2 trainable set: attention/MLP/lift at full rate, decoder
    // fine-tuned at dec_lr_scale; encoders included only for end-to-end.
    void collect_stage2(neural::ParamSet& out, double dec_lr_scale);

    // Variant wiring from latents to the compensation latent Z_comp (H x 32).
    neural::Tape::Id comp_latent(neural::Tape& t, neural::Tape::Id z_slip,
                                 neural::Tape::Id z_inekf) const;
    Mat plain_comp_latent(const Mat& z_slip, const Mat& z_inekf, Mat* attn_weights = nullptr) const;

    // Query-side latent from the (standardized) slip-channel window.
    neural::Tape::Id slip_latent(neural::Tape& t, neural::Tape::Id slip_window) const;
    Mat plain_slip_latent(const Mat& slip_window) const;
};

struct TeacherEncoder {
    neural::GruEncoder enc;  // 9 -> 128x2 -> 32
    void init(uint64_t seed);
};

// Checkpoint packing for the whole bundle (stage-1, stage-2, teacher, stats).
neural::Checkpoint pack_bundle(const Autoencoders& stage1, const TeacherEncoder& teacher,
                               const AttenNc& model, const std::string& meta);
void unpack_stage1(const neural::Checkpoint& ckpt, Autoencoders& stage1,
                   TeacherEncoder& teacher);
AttenNc unpack_model(const neural::Checkpoint& ckpt);

}  // namespace ankf::comp
