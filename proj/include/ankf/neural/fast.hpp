// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ankf/neural/layers.hpp"

namespace ankf::neural {

using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Allocation-free GRU forward for single-stream inference: the input-side
// gate products run as window-level GEMMs, the update/reset recurrences as
// one packed matvec per step, sequence buffers row-major for contiguous
// timestep rows. Numerically equivalent to plain_gru up to GEMM accumulation
// order; the plain path stays as the tested reference.
class GruFast {
public:
    void bind(const GruStack& params);

    // Returns final-layer hidden states, H x d_h; valid until the next run.
    const RMat& run(const Mat& seq);

private:
    struct Layer {
        const GruLayerParams* p = nullptr;
        Mat Wh_zr;  // [Wh_z | Wh_r], packed once
        RMat xz, xr, xn, out;
        Eigen::RowVectorXd h, zr, nrow;
        Eigen::Array<double, 1, Eigen::Dynamic> z, r, rh, n;
    };

    template <typename XMat>
    void run_layer(Layer& lay, const XMat& x);

    std::vector<Layer> layers_;
};

class EncoderFast {
public:
    void bind(const GruEncoder& params);
    const Mat& run(const Mat& seq);

private:
    const GruEncoder* p_ = nullptr;
    GruFast gru_;
    Mat latent_;
};

}  // namespace ankf::neural
