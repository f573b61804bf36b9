// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ankf/errors.hpp"
#include "ankf/neural/adam.hpp"
#include "ankf/neural/checkpoint.hpp"
#include "ankf/neural/layers.hpp"
#include "ankf/neural/tape.hpp"
#include "test_util.hpp"

using namespace ankf;
using namespace ankf::neural;

namespace {

Mat random_mat(std::mt19937_64& g, int r, int c, double scale = 1.0) {
    Mat m(r, c);
    for (int j = 0; j < c; ++j) {
        for (int i = 0; i < r; ++i) m(i, j) = test::uniform(g, -scale, scale);
    }
    return m;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Relative error of analytic vs central finite-difference gradients for
// every entry of every parameter in the set.
double gradcheck(const ParamSet& params, const std::function<double()>& loss_value,
                 const std::function<void(std::vector<Mat>&)>& analytic, int samples_per_param,
                 std::mt19937_64& g) {
    std::vector<Mat> grads;
    analytic(grads);
    double worst = 0.0;
    const double h = 1e-5;
    for (size_t i = 0; i < params.size(); ++i) {
        Mat& p = *params[i].value;
        for (int s = 0; s < samples_per_param; ++s) {
            const int r = static_cast<int>(g() % static_cast<uint64_t>(p.rows()));
            const int c = static_cast<int>(g() % static_cast<uint64_t>(p.cols()));
            const double orig = p(r, c);
            p(r, c) = orig + h;
            const double up = loss_value();
            p(r, c) = orig - h;
            const double dn = loss_value();
            p(r, c) = orig;
            const double fd = (up - dn) / (2.0 * h);
            const double rel = std::abs(grads[i](r, c) - fd) / std::max(1.0, std::abs(fd));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("zero-weight GRU propagates zeros") {
    GruStack p;
    Rng rng(1);
    p.init(3, 4, 2, rng);
    for (auto& l : p.layers) {
        l.Wx_z.setZero();
        l.Wh_z.setZero();
        l.Wx_r.setZero();
        l.Wh_r.setZero();
        l.Wx_n.setZero();
        l.Wh_n.setZero();
    }
    auto g = test::rng(2);
    const Mat seq = random_mat(g, 5, 3);
    CHECK(plain_gru(p, seq).norm() == 0.0);

    Tape t;
    CHECK(t.val(gru_forward(t, p, t.constant(seq))).norm() == 0.0);
}

TEST_CASE("single-step GRU matches the hand-expanded cell") {
    GruStack p;
    Rng rng(3);
    p.init(2, 3, 1, rng);
    auto g = test::rng(4);
    const Mat x = random_mat(g, 1, 2);

    const auto& l = p.layers[0];
    Eigen::RowVectorXd z(3), r(3), n(3), h(3);
    for (int j = 0; j < 3; ++j) {
        double az = l.b_z(0, j), ar = l.b_r(0, j), an = l.b_n(0, j);
        for (int i = 0; i < 2; ++i) {
            az += x(0, i) * l.Wx_z(i, j);
            ar += x(0, i) * l.Wx_r(i, j);
            an += x(0, i) * l.Wx_n(i, j);
        }
        z(j) = sigmoid(az);
        r(j) = sigmoid(ar);
        n(j) = std::tanh(an);
        h(j) = (1.0 - z(j)) * 0.0 + z(j) * n(j);
    }
    const Mat out = plain_gru(p, x);
    CHECK((out.row(0) - h).norm() < 1e-14);

    Tape t;
    const Mat tape_out = t.val(gru_forward(t, p, t.constant(x)));
    CHECK((tape_out - out).norm() < 1e-14);
}

TEST_CASE("GRU output stays in (-1,1) with zero initial state and is length-covariant") {
    GruStack p;
    Rng rng(5);
    p.init(4, 8, 2, rng);
    auto g = test::rng(6);
    const Mat seq = random_mat(g, 20, 4, 2.0);
    const Mat full = plain_gru(p, seq);
    CHECK(full.cwiseAbs().maxCoeff() < 1.0);

    // Prefix reproduces the prefix of hidden states exactly.
    const Mat prefix = plain_gru(p, seq.topRows(7));
    CHECK((full.topRows(7) - prefix).norm() == 0.0);
}

TEST_CASE("cross attention matches the dense recomputation oracle") {
    AttentionParams p;
    Rng rng(7);
    p.init(5, 6, 4, rng);
    auto g = test::rng(8);

    // H = 1: the single attention weight is 1 and the context is V.
    {
        const Mat zq = random_mat(g, 1, 5);
        const Mat zkv = random_mat(g, 1, 6);
        Mat alpha;
        const Mat ctx = plain_cross_attention(p, zq, zkv, &alpha);
        CHECK(alpha(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK((ctx - zkv * p.W_v).norm() < 1e-13);
    }

    // Identical key rows: uniform weights.
    {
        const Mat zq = random_mat(g, 4, 5);
        Mat zkv(4, 6);
        const Mat one_row = random_mat(g, 1, 6);
        for (int i = 0; i < 4; ++i) zkv.row(i) = one_row;
        Mat alpha;
        plain_cross_attention(p, zq, zkv, &alpha);
        CHECK((alpha.array() - 0.25).abs().maxCoeff() < 1e-12);
    }

    // Random case vs direct oracle; rows sum to one.
    const int H = 9;
    const Mat zq = random_mat(g, H, 5);
    const Mat zkv = random_mat(g, H, 6);
    Mat alpha;
    const Mat ctx = plain_cross_attention(p, zq, zkv, &alpha);
    const Mat Q = zq * p.W_q, K = zkv * p.W_k, V = zkv * p.W_v;
    Mat scores = Q * K.transpose() / 2.0;  // sqrt(d_h) = 2
    for (int r = 0; r < H; ++r) {
        Eigen::RowVectorXd e = scores.row(r).array().exp();
        e /= e.sum();
        CHECK((alpha.row(r) - e).norm() < 1e-12);
        CHECK(alpha.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(alpha.row(r).minCoeff() >= 0.0);
    }
    CHECK((ctx - alpha * V).norm() < 1e-12);

    Tape t;
    AttentionOut out = cross_attention(t, p, t.constant(zq), t.constant(zkv));
    CHECK((t.val(out.context) - ctx).norm() < 1e-12);
    CHECK((t.val(out.weights) - alpha).norm() < 1e-12);
}

TEST_CASE("mlp identity and zero-weight cases") {
    MlpParams p;
    Rng rng(9);
    p.init(3, 3, 3, rng);
    // Single effective layer: l1 = identity with zero bias, tanh, then undo
    // is not exact; instead test zero weights -> bias broadcast.
    p.l1.W.setZero();
    p.l1.b.setZero();
    p.l2.W.setZero();
    p.l2.b << 1.0, 2.0, 3.0;
    auto g = test::rng(10);
    const Mat x = random_mat(g, 6, 3);
    const Mat out = plain_mlp(p, x);
    for (int r = 0; r < 6; ++r) {
        CHECK((out.row(r) - p.l2.b.row(0)).norm() == 0.0);
    }

    // Identity-initialized single linear layer passes input through.
    LinearParams lin;
    lin.W = Mat::Identity(3, 3);
    lin.b = Mat::Zero(1, 3);
    CHECK((plain_linear(lin, x) - x).norm() == 0.0);
}

TEST_CASE("loss_state block weighting") {
    Tape t;
    Mat pred(1, 9), target(1, 9);
    pred.setZero();
    target.setZero();
    CHECK(t.val(loss_state(t, t.constant(pred), target, 1, 1, 1))(0, 0) == 0.0);

    pred.setOnes();
    target.setZero();
    CHECK(t.val(loss_state(t, t.constant(pred), target, 1, 1, 1))(0, 0) ==
          doctest::Approx(9.0));

    pred.setZero();
    pred(0, 0) = 1.0;  // rot block
    CHECK(t.val(loss_state(t, t.constant(pred), target, 2, 0, 0))(0, 0) ==
          doctest::Approx(2.0));
}

TEST_CASE("loss_latent vanishes at equality and is nonnegative") {
    auto g = test::rng(11);
    const Mat z = random_mat(g, 6, 4);
    {
        Tape t;
        // All three terms vanish up to last-ulp rounding of the cosine.
        CHECK(std::abs(t.val(loss_latent(t, t.constant(z), t.constant(z)))(0, 0)) < 1e-15);
    }
    for (int i = 0; i < 300; ++i) {
        const Mat a = random_mat(g, 3, 4, 2.0);
        const Mat b = random_mat(g, 3, 4, 2.0);
        Tape t;
        CHECK(t.val(loss_latent(t, t.constant(a), t.constant(b)))(0, 0) >= 0.0);
    }
    // Anti-aligned unit vectors: direct evaluation of the closed form.
    Mat u(1, 2);
    u << 1.0, 0.0;
    Tape t;
    const double got = t.val(loss_latent(t, t.constant(u), t.constant((-u).eval())))(0, 0);
    // mse = mean((2,0)^2) = 2; cosine term = 0.1*(1-(-1)) = 0.2;
    // kl = 0.01 * KL(softmax(-u)||softmax(u)).
    const double e2 = std::exp(2.0);
    const double kl = (1.0 / (1.0 + e2)) * 2.0 + (e2 / (1.0 + e2)) * (-2.0) +
                      std::log((1.0 + e2) / (1.0 + 1.0 / e2)) * 0.0;
    // KL(p||q) with p = softmax(-1,0), q = softmax(1,0): sum p log(p/q).
    const double p0 = std::exp(-1.0) / (std::exp(-1.0) + 1.0);
    const double q0 = std::exp(1.0) / (std::exp(1.0) + 1.0);
    const double kl_direct =
        p0 * std::log(p0 / q0) + (1 - p0) * std::log((1 - p0) / (1 - q0));
    (void)kl;
    CHECK(got == doctest::Approx(2.0 + 0.2 + 0.01 * kl_direct).epsilon(1e-10));
}

TEST_CASE("loss_latent rejects zero-norm latents for the cosine term") {
    Tape t;
    Mat z = Mat::Ones(2, 2);
    Mat zero = Mat::Zero(2, 2);
    CHECK_THROWS_AS(loss_latent(t, t.constant(z), t.constant(zero)), NumericalError);
}

TEST_CASE("backward: trivial identities") {
    // d(sum of params)/d(param) = 1 everywhere.
    Mat w = Mat::Ones(3, 2);
    Tape t;
    const auto leaf = t.leaf(&w);
    const auto loss = t.sum_all(leaf);
    t.backward(loss);
    CHECK((*t.leaf_grad(&w) - Mat::Ones(3, 2)).norm() == 0.0);

    // Constant loss: parameter gradient absent.
    Tape t2;
    const auto unused = t2.leaf(&w);
    (void)unused;
    const auto c = t2.constant(Mat::Ones(1, 1));
    t2.backward(t2.sum_all(c));
    CHECK(t2.leaf_grad(&w) == nullptr);
}

TEST_CASE("gradients match finite differences through the full stack") {
    // Encoder -> cross-attention -> MLP -> decoder -> combined losses;
    // small dims keep the FD loop fast.
    Rng rng(12);
    GruEncoder enc_a, enc_b;
    enc_a.init(3, 6, 2, 5, rng);  // query-side encoder, latent 5
    enc_b.init(4, 7, 2, 6, rng);  // key/value-side encoder, latent 6
    AttentionParams attn;
    attn.init(5, 6, 5, rng);
    MlpParams mlp;
    mlp.init(5, 8, 4, rng);
    GruStack dec_gru;
    dec_gru.init(4, 6, 2, rng);
    LinearParams head;
    head.init(6, 9, rng);

    auto g = test::rng(13);
    const int H = 6;
    const Mat xa = random_mat(g, H, 3);
    const Mat xb = random_mat(g, H, 4);
    const Mat teacher = random_mat(g, H, 4);
    const Mat target = random_mat(g, 1, 9);

    ParamSet params;
    enc_a.collect("enc_a", params);
    enc_b.collect("enc_b", params);
    attn.collect("attn", params);
    mlp.collect("mlp", params);
    dec_gru.collect("dec", params);
    head.collect("head", params);

    auto forward = [&](Tape& t) {
        const auto za = encoder_forward(t, enc_a, t.constant(xa));
        const auto zb = encoder_forward(t, enc_b, t.constant(xb));
        const auto att = cross_attention(t, attn, za, zb);
        const auto zc = mlp_forward(t, mlp, att.context);
        const auto hid = gru_forward(t, dec_gru, zc);
        const auto out_seq = linear_forward(t, head, hid);
        const auto last = t.row(out_seq, H - 1);
        const auto l_state = loss_state(t, last, target, 1.0, 0.5, 2.0);
        const auto l_latent = loss_latent(t, t.constant(teacher), zc);
        return t.add(l_state, t.scale(l_latent, 0.7));
    };

    auto loss_value = [&]() {
        Tape t;
        return t.val(forward(t))(0, 0);
    };
    auto analytic = [&](std::vector<Mat>& grads) {
        Tape t;
        t.backward(forward(t));
        grads.clear();
        for (const auto& p : params) {
            const Mat* gp = t.leaf_grad(p.value);
            grads.push_back(gp ? *gp : Mat::Zero(p.value->rows(), p.value->cols()));
        }
    };
    const double worst = gradcheck(params, loss_value, analytic, 4, g);
    CHECK(worst < 1e-4);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged; bowl converges") {
    Mat w(1, 2);
    w << 5.0, -3.0;
    ParamSet params{{"w", &w, 1.0}};
    Adam opt(1e-3);
    const Mat before = w;
    opt.step(params, {Mat::Zero(1, 2)});
    CHECK((w - before).norm() == 0.0);

    // First step with constant gradient moves by ~lr in -sign(g).
    Mat g_const(1, 2);
    g_const << 2.0, -1.0;
    Adam fresh(1e-3);
    fresh.step(params, {g_const});
    CHECK(w(0, 0) < before(0, 0));
    CHECK(w(0, 1) > before(0, 1));
    CHECK(std::abs((before(0, 0) - w(0, 0)) - 1e-3) < 1e-6);

    // Quadratic bowl: f = 0.5*||w||^2, grad = w.
    Adam opt2(1e-2);
    Mat w2(1, 2);
    w2 << 1.0, -2.0;
    ParamSet p2{{"w2", &w2, 1.0}};
    for (int i = 0; i < 2000; ++i) {
        opt2.step(p2, {w2});
    }
    CHECK(0.5 * w2.squaredNorm() < 1e-6);
}

TEST_CASE("checkpoint round trips blocks and metadata") {
    auto g = test::rng(14);
    Checkpoint ckpt;
    ckpt.blocks["enc.l0.W"] = random_mat(g, 7, 5);
    ckpt.blocks["dec.b"] = random_mat(g, 1, 9);
    ckpt.meta = R"({"config_hash":"abc123","stage":2})";
    const std::string path = "/tmp/ankf_test_ckpt.bin";
    save_checkpoint(path, ckpt);
    const Checkpoint back = load_checkpoint(path);
    REQUIRE(back.blocks.size() == 2);
    CHECK((back.blocks.at("enc.l0.W") - ckpt.blocks.at("enc.l0.W")).norm() == 0.0);
    CHECK((back.blocks.at("dec.b") - ckpt.blocks.at("dec.b")).norm() == 0.0);
    CHECK(back.meta == ckpt.meta);
    CHECK_THROWS_AS(load_checkpoint("/tmp/does_not_exist_ankf.bin"), DataError);
}

TEST_CASE("tape flags non-finite results") {
    Tape t;
    Mat z = Mat::Zero(1, 1);
    const auto a = t.constant(z);
    CHECK_THROWS_AS(t.log_(a), NumericalError);
}
