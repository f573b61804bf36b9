// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ankf/neural/tape.hpp"
#include "ankf/rng.hpp"

namespace ankf::neural {

// Row-vector convention throughout: activations are 1 x d (or H x d for
// sequences), weights are d_in x d_out.

// tanh via the vectorized exp kernel; Eigen's double tanh is scalar.
// Exact at 0 and saturates cleanly at +-1.
template <typename Derived>
auto stable_tanh(const Eigen::ArrayBase<Derived>& x) {
    return 1.0 - 2.0 / ((2.0 * x).exp() + 1.0);
}

struct ParamRef {
    std::string name;
    Mat* value;
    double lr_scale = 1.0;
};

using ParamSet = std::vector<ParamRef>;

struct LinearParams {
    Mat W, b;
    void init(int d_in, int d_out, Rng& rng);
    void collect(const std::string& prefix, ParamSet& out, double lr_scale = 1.0);
};

// Cho-style GRU cell:
//   z = sigm(x Wxz + h Whz + bz), r = sigm(x Wxr + h Whr + br)
//   n = tanh(x Wxn + (r.h) Whn + bn), h' = (1-z).h + z.n
struct GruLayerParams {
    Mat Wx_z, Wh_z, b_z;
    Mat Wx_r, Wh_r, b_r;
    Mat Wx_n, Wh_n, b_n;
    void init(int d_in, int d_h, Rng& rng);
    void collect(const std::string& prefix, ParamSet& out, double lr_scale = 1.0);
    int hidden() const { return static_cast<int>(Wh_z.rows()); }
};

struct GruStack {
    std::vector<GruLayerParams> layers;
    void init(int d_in, int d_h, int num_layers, Rng& rng);
    void collect(const std::string& prefix, ParamSet& out, double lr_scale = 1.0);
};

// GRU stack followed by a per-timestep linear projection.
struct GruEncoder {
    GruStack gru;
    LinearParams proj;
    void init(int d_in, int d_h, int num_layers, int d_latent, Rng& rng);
    void collect(const std::string& prefix, ParamSet& out, double lr_scale = 1.0);
};

using GruDecoder = GruEncoder;  // same shape: latent in, projection out

struct AttentionParams {
    Mat W_q, W_k, W_v;
    void init(int d_q, int d_kv, int d_h, Rng& rng);
    void collect(const std::string& prefix, ParamSet& out, double lr_scale = 1.0);
};

struct MlpParams {
    LinearParams l1, l2;  // tanh between
    void init(int d_in, int d_hidden, int d_out, Rng& rng);
    void collect(const std::string& prefix, ParamSet& out, double lr_scale = 1.0);
};

// --- Tape forwards (training) ---

// seq: H x d_in node. Returns H x d_h node of final-layer hidden states.
Tape::Id gru_forward(Tape& t, const GruStack& p, Tape::Id seq);
Tape::Id encoder_forward(Tape& t, const GruEncoder& p, Tape::Id seq);
Tape::Id linear_forward(Tape& t, const LinearParams& p, Tape::Id x);
Tape::Id mlp_forward(Tape& t, const MlpParams& p, Tape::Id x);

struct AttentionOut {
    Tape::Id context;  // H x d_h
    Tape::Id weights;  // H x H, rows sum to 1
};
AttentionOut cross_attention(Tape& t, const AttentionParams& p, Tape::Id z_query,
                             Tape::Id z_keyval);

// --- Plain forwards (frozen encoders, inference) ---

Mat plain_gru(const GruStack& p, const Mat& seq);
Mat plain_encoder(const GruEncoder& p, const Mat& seq);
Mat plain_linear(const LinearParams& p, const Mat& x);
Mat plain_mlp(const MlpParams& p, const Mat& x);
Mat plain_cross_attention(const AttentionParams& p, const Mat& z_query, const Mat& z_keyval,
                          Mat* weights = nullptr);

// --- Losses ---

// Weighted block MSE over the 9-vector residual [rot; vel; pos].
Tape::Id loss_state(Tape& t, Tape::Id pred_1x9, const Mat& target_1x9, double w_rot,
                    double w_vel, double w_pos);

// MSE + 0.1 (1 - cos) + 0.01 KL(softmax(student) || softmax(teacher)),
// cosine and KL over the flattened window latents. Pass the teacher as a
// constant node to freeze it.
Tape::Id loss_latent(Tape& t, Tape::Id teacher, Tape::Id student);

double plain_loss_state(const Eigen::Matrix<double, 9, 1>& pred,
                        const Eigen::Matrix<double, 9, 1>& target, double w_rot, double w_vel,
                        double w_pos);

}  // namespace ankf::neural
