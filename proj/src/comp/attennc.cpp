// SPDX-License-Identifier: Apache-2.0
#include "ankf/comp/attennc.hpp"

#include "ankf/errors.hpp"
#include "ankf/rng.hpp"

namespace ankf::comp {

using neural::ParamSet;
using neural::Tape;

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::kProposed: return "proposed";
        case Variant::kNoAtten: return "no-atten";
        case Variant::kSelfAtten: return "self-atten";
        case Variant::kNoTeach: return "no-teach";
        case Variant::kEndToEnd: return "end-to-end";
        case Variant::kRawFootVelocity: return "raw-foot-velocity";
        case Variant::kExplicitSlip: return "explicit-slip";
    }
    throw DataError("variant_name: unknown variant");
}

Variant variant_from_name(const std::string& name) {
    for (const Variant v :
         {Variant::kProposed, Variant::kNoAtten, Variant::kSelfAtten, Variant::kNoTeach,
          Variant::kEndToEnd, Variant::kRawFootVelocity, Variant::kExplicitSlip}) {
        if (variant_name(v) == name) return v;
    }
    throw ConfigError("unknown variant: " + name);
}

void Autoencoders::init(uint64_t seed) {
    Rng rng(seed);
    enc_slip.init(Dims::kSlipIn, Dims::kSlipHidden, Dims::kLayers, Dims::kSlipLatent, rng);
    dec_slip.init(Dims::kSlipLatent, Dims::kSlipHidden, Dims::kLayers, Dims::kSlipIn, rng);
    enc_inekf.init(Dims::kInekfIn, Dims::kInekfHidden, Dims::kLayers, Dims::kInekfLatent, rng);
    dec_inekf.init(Dims::kInekfLatent, Dims::kInekfHidden, Dims::kLayers, Dims::kInekfIn, rng);
    enc_err.init(Dims::kErrIn, Dims::kErrHidden, Dims::kLayers, Dims::kErrLatent, rng);
    dec_err.init(Dims::kErrLatent, Dims::kErrHidden, Dims::kLayers, Dims::kErrIn, rng);
}

void Autoencoders::collect(ParamSet& out) {
    enc_slip.collect("s1.enc_slip", out);
    dec_slip.collect("s1.dec_slip", out);
    enc_inekf.collect("s1.enc_inekf", out);
    dec_inekf.collect("s1.dec_inekf", out);
    enc_err.collect("s1.enc_err", out);
    dec_err.collect("s1.dec_err", out);
}

namespace {

int query_dim(Variant v) {
    switch (v) {
        case Variant::kSelfAtten: return Dims::kInekfLatent;
        default: return Dims::kSlipLatent;
    }
}

int mlp_in_dim(Variant v) {
    if (v == Variant::kNoAtten) return Dims::kSlipLatent + Dims::kInekfLatent;
    return Dims::kAttnDim;
}

void init_head(AttenNc& m, uint64_t seed) {
    Rng rng(seed ^ 0x61747465ULL);
    if (m.has_attention()) {
        m.attn.init(query_dim(m.variant), Dims::kInekfLatent, Dims::kAttnDim, rng);
    }
    m.mlp.init(mlp_in_dim(m.variant), Dims::kMlpHidden, Dims::kCompLatent, rng);
    if (m.has_slip_lift()) {
        m.slip_lift.init(Dims::kSlipIn, Dims::kSlipLatent, rng);
    }
}

}  // namespace

AttenNc AttenNc::assemble(Variant variant, const Autoencoders& stage1, uint64_t seed) {
    AttenNc m;
    m.variant = variant;
    m.enc_inekf = stage1.enc_inekf;
    if (m.has_slip_encoder()) m.enc_slip = stage1.enc_slip;
    m.dec = stage1.dec_err;  // fine-tuned and reused as the compensation decoder
    init_head(m, seed);
    return m;
}

AttenNc AttenNc::from_scratch(Variant variant, uint64_t seed) {
    AttenNc m;
    m.variant = variant;
    Rng rng(seed ^ 0x65326531ULL);
    m.enc_inekf.init(Dims::kInekfIn, Dims::kInekfHidden, Dims::kLayers, Dims::kInekfLatent, rng);
    if (m.has_slip_encoder()) {
        const int in = Dims::kSlipIn;
        m.enc_slip.init(in, Dims::kSlipHidden, Dims::kLayers, Dims::kSlipLatent, rng);
    }
    m.dec.init(Dims::kCompLatent, Dims::kErrHidden, Dims::kLayers, Dims::kErrIn, rng);
    init_head(m, seed);
    return m;
}

void AttenNc::collect_all(ParamSet& out) {
    enc_inekf.collect("s2.enc_inekf", out);
    if (has_slip_encoder()) enc_slip.collect("s2.enc_slip", out);
    if (has_slip_lift()) slip_lift.collect("s2.slip_lift", out);
    if (has_attention()) attn.collect("s2.attn", out);
    mlp.collect("s2.mlp", out);
    dec.collect("s2.dec", out);
}

void AttenNc::collect_stage2(ParamSet& out, double dec_lr_scale) {
    if (variant == Variant::kEndToEnd) {
        enc_inekf.collect("s2.enc_inekf", out);
        if (has_slip_encoder()) enc_slip.collect("s2.enc_slip", out);
    }
    if (has_slip_lift()) slip_lift.collect("s2.slip_lift", out);
    if (has_attention()) attn.collect("s2.attn", out);
    mlp.collect("s2.mlp", out);
    dec.collect("s2.dec", out,
                variant == Variant::kEndToEnd ? 1.0 : dec_lr_scale);
}

Tape::Id AttenNc::slip_latent(Tape& t, Tape::Id slip_window) const {
    if (has_slip_lift()) return neural::linear_forward(t, slip_lift, slip_window);
    if (!has_slip_encoder()) throw DataError("slip_latent: variant has no slip path");
    return neural::encoder_forward(t, enc_slip, slip_window);
}

Mat AttenNc::plain_slip_latent(const Mat& slip_window) const {
    if (has_slip_lift()) return neural::plain_linear(slip_lift, slip_window);
    if (!has_slip_encoder()) throw DataError("plain_slip_latent: variant has no slip path");
    return neural::plain_encoder(enc_slip, slip_window);
}

Tape::Id AttenNc::comp_latent(Tape& t, Tape::Id z_slip, Tape::Id z_inekf) const {
    if (variant == Variant::kNoAtten) {
        return neural::mlp_forward(t, mlp, t.concat_cols(z_slip, z_inekf));
    }
    const Tape::Id query = (variant == Variant::kSelfAtten) ? z_inekf : z_slip;
    const auto att = neural::cross_attention(t, attn, query, z_inekf);
    return neural::mlp_forward(t, mlp, att.context);
}

Mat AttenNc::plain_comp_latent(const Mat& z_slip, const Mat& z_inekf, Mat* attn_weights) const {
    if (variant == Variant::kNoAtten) {
        Mat cat(z_slip.rows(), z_slip.cols() + z_inekf.cols());
        cat << z_slip, z_inekf;
        return neural::plain_mlp(mlp, cat);
    }
    const Mat& query = (variant == Variant::kSelfAtten) ? z_inekf : z_slip;
    const Mat ctx = neural::plain_cross_attention(attn, query, z_inekf, attn_weights);
    return neural::plain_mlp(mlp, ctx);
}

void TeacherEncoder::init(uint64_t seed) {
    Rng rng(seed ^ 0x74656163ULL);
    enc.init(Dims::kErrIn, Dims::kErrHidden, Dims::kLayers, Dims::kErrLatent, rng);
}

namespace {

void put_params(neural::Checkpoint& ckpt, ParamSet& params) {
    for (const auto& p : params) ckpt.blocks[p.name] = *p.value;
}

void get_params(const neural::Checkpoint& ckpt, ParamSet& params, const std::string& what) {
    for (auto& p : params) {
        const auto it = ckpt.blocks.find(p.name);
        if (it == ckpt.blocks.end()) {
            throw DataError("checkpoint: missing block " + p.name + " for " + what);
        }
        if (it->second.rows() != p.value->rows() || it->second.cols() != p.value->cols()) {
            throw DataError("checkpoint: shape mismatch for " + p.name);
        }
        *p.value = it->second;
    }
}

void put_norm(neural::Checkpoint& ckpt, const Normalization& n) {
    auto put = [&](const std::string& name, const Eigen::VectorXd& v) {
        ckpt.blocks["norm." + name] = v.transpose();
    };
    put("mean_x", n.mean_x);
    put("std_x", n.std_x);
    put("mean_dx", n.mean_dx);
    put("std_dx", n.std_dx);
    put("mean_slip", n.mean_slip);
    put("std_slip", n.std_slip);
    put("mean_speed", n.mean_speed);
    put("std_speed", n.std_speed);
    put("mean_err", n.mean_err);
    put("std_err", n.std_err);
}

Normalization get_norm(const neural::Checkpoint& ckpt) {
    Normalization n;
    auto get = [&](const std::string& name, Eigen::VectorXd& v) {
        const auto it = ckpt.blocks.find("norm." + name);
        if (it == ckpt.blocks.end()) throw DataError("checkpoint: missing norm." + name);
        v = it->second.row(0).transpose();
    };
    get("mean_x", n.mean_x);
    get("std_x", n.std_x);
    get("mean_dx", n.mean_dx);
    get("std_dx", n.std_dx);
    get("mean_slip", n.mean_slip);
    get("std_slip", n.std_slip);
    get("mean_speed", n.mean_speed);
    get("std_speed", n.std_speed);
    get("mean_err", n.mean_err);
    get("std_err", n.std_err);
    return n;
}

}  // namespace

neural::Checkpoint pack_bundle(const Autoencoders& stage1, const TeacherEncoder& teacher,
                               const AttenNc& model, const std::string& meta) {
    neural::Checkpoint ckpt;
    ParamSet s1;
    const_cast<Autoencoders&>(stage1).collect(s1);
    put_params(ckpt, s1);
    ParamSet tp;
    const_cast<TeacherEncoder&>(teacher).enc.collect("teacher", tp);
    put_params(ckpt, tp);
    ParamSet s2;
    const_cast<AttenNc&>(model).collect_all(s2);
    put_params(ckpt, s2);
    put_norm(ckpt, model.norm);
    ckpt.meta = meta;
    return ckpt;
}

void unpack_stage1(const neural::Checkpoint& ckpt, Autoencoders& stage1,
                   TeacherEncoder& teacher) {
    stage1.init(0);
    teacher.init(0);
    ParamSet s1;
    stage1.collect(s1);
    get_params(ckpt, s1, "stage-1 autoencoders");
    ParamSet tp;
    teacher.enc.collect("teacher", tp);
    get_params(ckpt, tp, "teacher encoder");
}

AttenNc unpack_model(const neural::Checkpoint& ckpt) {
    // Variant is recorded in the metadata as variant=<name>; keep parsing
    // forgiving so callers can extend the meta JSON.
    const std::string key = "\"variant\":\"";
    const auto pos = ckpt.meta.find(key);
    if (pos == std::string::npos) throw DataError("checkpoint: meta lacks variant");
    const auto end = ckpt.meta.find('"', pos + key.size());
    const Variant v = variant_from_name(ckpt.meta.substr(pos + key.size(), end - pos - key.size()));

    AttenNc m = AttenNc::from_scratch(v, 0);
    ParamSet s2;
    m.collect_all(s2);
    get_params(ckpt, s2, "stage-2 model");
    m.norm = get_norm(ckpt);
    return m;
}

}  // namespace ankf::comp
