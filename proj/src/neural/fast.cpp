// SPDX-License-Identifier: Apache-2.0
#include "ankf/neural/fast.hpp"

namespace ankf::neural {

void GruFast::bind(const GruStack& params) {
    layers_.clear();
    layers_.resize(params.layers.size());
    for (size_t l = 0; l < params.layers.size(); ++l) {
        Layer& lay = layers_[l];
        lay.p = &params.layers[l];
        const int dh = lay.p->hidden();
        lay.Wh_zr.resize(dh, 2 * dh);
        lay.Wh_zr << lay.p->Wh_z, lay.p->Wh_r;
        lay.h.resize(dh);
        lay.zr.resize(2 * dh);
        lay.nrow.resize(dh);
        lay.z.resize(dh);
        lay.r.resize(dh);
        lay.rh.resize(dh);
        lay.n.resize(dh);
    }
}

template <typename XMat>
void GruFast::run_layer(Layer& lay, const XMat& x) {
    const GruLayerParams& p = *lay.p;
    const int H = static_cast<int>(x.rows());
    const int dh = p.hidden();
    lay.xz.resize(H, dh);
    lay.xr.resize(H, dh);
    lay.xn.resize(H, dh);
    lay.out.resize(H, dh);
    lay.xz.noalias() = x * p.Wx_z;
    lay.xz.rowwise() += p.b_z.row(0);
    lay.xr.noalias() = x * p.Wx_r;
    lay.xr.rowwise() += p.b_r.row(0);
    lay.xn.noalias() = x * p.Wx_n;
    lay.xn.rowwise() += p.b_n.row(0);

    lay.h.setZero();
    for (int i = 0; i < H; ++i) {
        lay.zr.noalias() = lay.h * lay.Wh_zr;
        // Evaluate each gate exactly once into its buffer.
        lay.z = 1.0 / (1.0 + (-(lay.xz.row(i) + lay.zr.head(dh))).array().exp());
        lay.r = 1.0 / (1.0 + (-(lay.xr.row(i) + lay.zr.tail(dh))).array().exp());
        lay.rh = lay.r * lay.h.array();
        lay.nrow.noalias() = lay.rh.matrix() * p.Wh_n;
        lay.n = stable_tanh((lay.xn.row(i) + lay.nrow).array());
        lay.h = ((1.0 - lay.z) * lay.h.array() + lay.z * lay.n).matrix();
        lay.out.row(i) = lay.h;
    }
}

const RMat& GruFast::run(const Mat& seq) {
    run_layer(layers_[0], seq);
    for (size_t l = 1; l < layers_.size(); ++l) {
        run_layer(layers_[l], layers_[l - 1].out);
    }
    return layers_.back().out;
}

void EncoderFast::bind(const GruEncoder& params) {
    p_ = &params;
    gru_.bind(params.gru);
}

const Mat& EncoderFast::run(const Mat& seq) {
    const RMat& hidden = gru_.run(seq);
    latent_.resize(hidden.rows(), p_->proj.W.cols());
    latent_.noalias() = hidden * p_->proj.W;
    latent_.rowwise() += p_->proj.b.row(0);
    return latent_;
}

}  // namespace ankf::neural
