// SPDX-License-Identifier: Apache-2.0
#include "ankf/neural/layers.hpp"

#include <cmath>

#include "ankf/errors.hpp"

namespace ankf::neural {

namespace {

Mat uniform_init(int rows, int cols, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Mat m(rows, cols);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
    }
    return m;
}

}  // namespace

void LinearParams::init(int d_in, int d_out, Rng& rng) {
    W = uniform_init(d_in, d_out, d_in, rng);
    b = Mat::Zero(1, d_out);
}

void LinearParams::collect(const std::string& prefix, ParamSet& out, double lr_scale) {
    out.push_back({prefix + ".W", &W, lr_scale});
    out.push_back({prefix + ".b", &b, lr_scale});
}

void GruLayerParams::init(int d_in, int d_h, Rng& rng) {
    Wx_z = uniform_init(d_in, d_h, d_in, rng);
    Wh_z = uniform_init(d_h, d_h, d_h, rng);
    b_z = Mat::Zero(1, d_h);
    Wx_r = uniform_init(d_in, d_h, d_in, rng);
    Wh_r = uniform_init(d_h, d_h, d_h, rng);
    b_r = Mat::Zero(1, d_h);
    Wx_n = uniform_init(d_in, d_h, d_in, rng);
    Wh_n = uniform_init(d_h, d_h, d_h, rng);
    b_n = Mat::Zero(1, d_h);
}

void GruLayerParams::collect(const std::string& prefix, ParamSet& out, double lr_scale) {
    out.push_back({prefix + ".Wx_z", &Wx_z, lr_scale});
    out.push_back({prefix + ".Wh_z", &Wh_z, lr_scale});
    out.push_back({prefix + ".b_z", &b_z, lr_scale});
    out.push_back({prefix + ".Wx_r", &Wx_r, lr_scale});
    out.push_back({prefix + ".Wh_r", &Wh_r, lr_scale});
    out.push_back({prefix + ".b_r", &b_r, lr_scale});
    out.push_back({prefix + ".Wx_n", &Wx_n, lr_scale});
    out.push_back({prefix + ".Wh_n", &Wh_n, lr_scale});
    out.push_back({prefix + ".b_n", &b_n, lr_scale});
}

void GruStack::init(int d_in, int d_h, int num_layers, Rng& rng) {
    layers.resize(static_cast<size_t>(num_layers));
    for (int l = 0; l < num_layers; ++l) {
        layers[static_cast<size_t>(l)].init(l == 0 ? d_in : d_h, d_h, rng);
    }
}

void GruStack::collect(const std::string& prefix, ParamSet& out, double lr_scale) {
    for (size_t l = 0; l < layers.size(); ++l) {
        layers[l].collect(prefix + ".l" + std::to_string(l), out, lr_scale);
    }
}

void GruEncoder::init(int d_in, int d_h, int num_layers, int d_latent, Rng& rng) {
    gru.init(d_in, d_h, num_layers, rng);
    proj.init(d_h, d_latent, rng);
}

void GruEncoder::collect(const std::string& prefix, ParamSet& out, double lr_scale) {
    gru.collect(prefix + ".gru", out, lr_scale);
    proj.collect(prefix + ".proj", out, lr_scale);
}

void AttentionParams::init(int d_q, int d_kv, int d_h, Rng& rng) {
    W_q = uniform_init(d_q, d_h, d_q, rng);
    W_k = uniform_init(d_kv, d_h, d_kv, rng);
    W_v = uniform_init(d_kv, d_h, d_kv, rng);
}

void AttentionParams::collect(const std::string& prefix, ParamSet& out, double lr_scale) {
    out.push_back({prefix + ".W_q", &W_q, lr_scale});
    out.push_back({prefix + ".W_k", &W_k, lr_scale});
    out.push_back({prefix + ".W_v", &W_v, lr_scale});
}

void MlpParams::init(int d_in, int d_hidden, int d_out, Rng& rng) {
    l1.init(d_in, d_hidden, rng);
    l2.init(d_hidden, d_out, rng);
}

void MlpParams::collect(const std::string& prefix, ParamSet& out, double lr_scale) {
    l1.collect(prefix + ".l1", out, lr_scale);
    l2.collect(prefix + ".l2", out, lr_scale);
}

// --- Tape forwards ---

namespace {

// Input-side gate matmuls run as one GEMM over the window; only the
// recurrent matvecs are per-timestep.
Tape::Id gru_layer_forward(Tape& t, const GruLayerParams& p, Tape::Id seq) {
    const Tape::Id whz = t.leaf(&p.Wh_z), whr = t.leaf(&p.Wh_r), whn = t.leaf(&p.Wh_n);
    const Tape::Id xz = t.add_rowvec(t.matmul(seq, t.leaf(&p.Wx_z)), t.leaf(&p.b_z));
    const Tape::Id xr = t.add_rowvec(t.matmul(seq, t.leaf(&p.Wx_r)), t.leaf(&p.b_r));
    const Tape::Id xn = t.add_rowvec(t.matmul(seq, t.leaf(&p.Wx_n)), t.leaf(&p.b_n));

    const int H = static_cast<int>(t.val(seq).rows());
    Tape::Id h = t.constant(Mat::Zero(1, p.hidden()));
    std::vector<Tape::Id> out;
    out.reserve(static_cast<size_t>(H));
    for (int i = 0; i < H; ++i) {
        const Tape::Id z = t.sigmoid(t.add(t.row(xz, i), t.matmul(h, whz)));
        const Tape::Id r = t.sigmoid(t.add(t.row(xr, i), t.matmul(h, whr)));
        const Tape::Id n = t.tanh_(t.add(t.row(xn, i), t.matmul(t.hadamard(r, h), whn)));
        h = t.add(t.sub(h, t.hadamard(z, h)), t.hadamard(z, n));
        out.push_back(h);
    }
    return t.vstack(out);
}

}  // namespace

Tape::Id gru_forward(Tape& t, const GruStack& p, Tape::Id seq) {
    for (const auto& layer : p.layers) seq = gru_layer_forward(t, layer, seq);
    return seq;
}

Tape::Id linear_forward(Tape& t, const LinearParams& p, Tape::Id x) {
    return t.add_rowvec(t.matmul(x, t.leaf(&p.W)), t.leaf(&p.b));
}

Tape::Id encoder_forward(Tape& t, const GruEncoder& p, Tape::Id seq) {
    return linear_forward(t, p.proj, gru_forward(t, p.gru, seq));
}

Tape::Id mlp_forward(Tape& t, const MlpParams& p, Tape::Id x) {
    return linear_forward(t, p.l2, t.tanh_(linear_forward(t, p.l1, x)));
}

AttentionOut cross_attention(Tape& t, const AttentionParams& p, Tape::Id z_query,
                             Tape::Id z_keyval) {
    const Tape::Id Q = t.matmul(z_query, t.leaf(&p.W_q));
    const Tape::Id K = t.matmul(z_keyval, t.leaf(&p.W_k));
    const Tape::Id V = t.matmul(z_keyval, t.leaf(&p.W_v));
    const double d_h = static_cast<double>(p.W_q.cols());
    const Tape::Id alpha = t.softmax_rows(t.scale(t.matmul_nt(Q, K), 1.0 / std::sqrt(d_h)));
    return {t.matmul(alpha, V), alpha};
}

// --- Plain forwards ---

Mat plain_gru(const GruStack& p, const Mat& seq) {
    const int H = static_cast<int>(seq.rows());
    Mat x = seq;
    for (const auto& layer : p.layers) {
        const int dh = layer.hidden();
        Mat out(H, dh);
        Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(dh);
        for (int i = 0; i < H; ++i) {
            const auto xi = x.row(i);
            const Eigen::RowVectorXd z =
                (1.0 / (1.0 + (-(xi * layer.Wx_z + h * layer.Wh_z + layer.b_z)).array().exp()));
            const Eigen::RowVectorXd r =
                (1.0 / (1.0 + (-(xi * layer.Wx_r + h * layer.Wh_r + layer.b_r)).array().exp()));
            const Eigen::RowVectorXd n = stable_tanh(
                (xi * layer.Wx_n + (r.array() * h.array()).matrix() * layer.Wh_n + layer.b_n)
                    .array());
            h = ((1.0 - z.array()) * h.array() + z.array() * n.array()).matrix();
            out.row(i) = h;
        }
        x = std::move(out);
    }
    return x;
}

Mat plain_linear(const LinearParams& p, const Mat& x) {
    Mat out = x * p.W;
    out.rowwise() += p.b.row(0);
    return out;
}

Mat plain_encoder(const GruEncoder& p, const Mat& seq) {
    return plain_linear(p.proj, plain_gru(p.gru, seq));
}

Mat plain_mlp(const MlpParams& p, const Mat& x) {
    return plain_linear(p.l2, stable_tanh(plain_linear(p.l1, x).array()).matrix());
}

Mat plain_cross_attention(const AttentionParams& p, const Mat& z_query, const Mat& z_keyval,
                          Mat* weights) {
    const Mat Q = z_query * p.W_q;
    const Mat K = z_keyval * p.W_k;
    const Mat V = z_keyval * p.W_v;
    Mat S = Q * K.transpose() / std::sqrt(static_cast<double>(p.W_q.cols()));
    for (int r = 0; r < S.rows(); ++r) {
        const double mx = S.row(r).maxCoeff();
        S.row(r) = (S.row(r).array() - mx).exp();
        S.row(r) /= S.row(r).sum();
    }
    if (weights) *weights = S;
    return S * V;
}

// --- Losses ---

Tape::Id loss_state(Tape& t, Tape::Id pred_1x9, const Mat& target_1x9, double w_rot,
                    double w_vel, double w_pos) {
    const Tape::Id resid = t.sub(pred_1x9, t.constant(target_1x9));
    auto block_sq = [&](int c0) {
        const Tape::Id seg = t.cols(resid, c0, 3);
        return t.sum_all(t.hadamard(seg, seg));
    };
    return t.add(t.add(t.scale(block_sq(0), w_rot), t.scale(block_sq(3), w_vel)),
                 t.scale(block_sq(6), w_pos));
}

Tape::Id loss_latent(Tape& t, Tape::Id teacher, Tape::Id student) {
    const Tape::Id diff = t.sub(student, teacher);
    const Tape::Id mse = t.mean_all(t.hadamard(diff, diff));

    const int n = static_cast<int>(t.val(teacher).size());
    const Tape::Id fs = t.reshape(student, 1, n);
    const Tape::Id ft = t.reshape(teacher, 1, n);

    const Tape::Id student_norm = t.s_sqrt(t.sum_all(t.hadamard(fs, fs)));
    const Tape::Id teacher_norm = t.s_sqrt(t.sum_all(t.hadamard(ft, ft)));
    if (t.val(teacher_norm)(0, 0) < 1e-12 || t.val(student_norm)(0, 0) < 1e-12) {
        throw NumericalError("loss_latent: zero-norm latent for cosine term");
    }
    const Tape::Id dot = t.sum_all(t.hadamard(fs, ft));
    const Tape::Id cos = t.s_div(dot, t.s_mul(student_norm, teacher_norm));
    const Tape::Id one_minus_cos = t.add_scalar(t.scale(cos, -1.0), 1.0);

    // KL(softmax(student) || softmax(teacher)) over the flattened window.
    const Tape::Id p = t.softmax_rows(fs);
    const Tape::Id q = t.softmax_rows(ft);
    const Tape::Id kl = t.sum_all(t.hadamard(p, t.sub(t.log_(p), t.log_(q))));

    return t.add(t.add(mse, t.scale(one_minus_cos, 0.1)), t.scale(kl, 0.01));
}

double plain_loss_state(const Eigen::Matrix<double, 9, 1>& pred,
                        const Eigen::Matrix<double, 9, 1>& target, double w_rot, double w_vel,
                        double w_pos) {
    const Eigen::Matrix<double, 9, 1> r = pred - target;
    return w_rot * r.segment<3>(0).squaredNorm() + w_vel * r.segment<3>(3).squaredNorm() +
           w_pos * r.segment<3>(6).squaredNorm();
}

}  // namespace ankf::neural
