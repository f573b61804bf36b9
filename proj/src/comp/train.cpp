// SPDX-License-Identifier: Apache-2.0
#include "ankf/comp/train.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <functional>

#include "ankf/errors.hpp"
#include "ankf/neural/adam.hpp"
#include "ankf/rng.hpp"

namespace ankf::comp {

using neural::Adam;
using neural::ParamSet;
using neural::Tape;

namespace {

// Windows are evaluated in fixed blocks; blocks run in parallel but are
// reduced in index order, so gradients are identical for any thread count.
constexpr size_t kBlock = 8;

struct BatchStats {
    double latent = 0.0;
    double state = 0.0;
    double total = 0.0;
};

using WindowBuilder = std::function<Tape::Id(Tape&, int, double*, double*)>;

BatchStats eval_batch(const ParamSet& params, const std::vector<int>& order, size_t begin,
                      size_t end, const WindowBuilder& build, bool with_grads, bool parallel,
                      std::vector<Mat>* grads_out) {
    const size_t count = end - begin;
    const size_t num_blocks = (count + kBlock - 1) / kBlock;

    struct Block {
        std::vector<Mat> grads;
        BatchStats stats;
    };
    std::vector<Block> blocks(num_blocks);
    std::atomic<bool> failed{false};
    std::string error_msg;

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (size_t b = 0; b < num_blocks; ++b) {
        if (failed.load()) continue;
        Block& blk = blocks[b];
        if (with_grads) blk.grads.resize(params.size());
        try {
            const size_t lo = begin + b * kBlock;
            const size_t hi = std::min(lo + kBlock, end);
            for (size_t i = lo; i < hi; ++i) {
                Tape t;
                double latent = 0.0, state = 0.0;
                const Tape::Id loss = build(t, order[i], &latent, &state);
                blk.stats.latent += latent;
                blk.stats.state += state;
                blk.stats.total += t.val(loss)(0, 0);
                if (!with_grads) continue;
                t.backward(loss);
                for (size_t p = 0; p < params.size(); ++p) {
                    const Mat* g = t.leaf_grad(params[p].value);
                    if (!g) continue;
                    if (blk.grads[p].size() == 0) {
                        blk.grads[p] = *g;
                    } else {
                        blk.grads[p] += *g;
                    }
                }
            }
        } catch (const std::exception& e) {
#pragma omp critical
            {
                if (!failed.exchange(true)) error_msg = e.what();
            }
        }
    }
    if (failed.load()) throw NumericalError("training diverged: " + error_msg);

    BatchStats stats;
    if (with_grads) {
        grads_out->assign(params.size(), Mat());
        for (size_t p = 0; p < params.size(); ++p) {
            (*grads_out)[p] = Mat::Zero(params[p].value->rows(), params[p].value->cols());
        }
    }
    for (const Block& blk : blocks) {
        stats.latent += blk.stats.latent;
        stats.state += blk.stats.state;
        stats.total += blk.stats.total;
        if (!with_grads) continue;
        for (size_t p = 0; p < params.size(); ++p) {
            if (blk.grads[p].size() != 0) (*grads_out)[p] += blk.grads[p];
        }
    }
    return stats;
}

std::vector<int> shuffled_order(size_t n, Rng& rng) {
    std::vector<int> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    for (size_t i = n; i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.uniform() * static_cast<double>(i));
        std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    return order;
}

// One optimization pass over the dataset; returns per-window mean stats.
BatchStats run_epoch(const ParamSet& params, Adam& opt, const Dataset& data,
                     const WindowBuilder& build, const TrainingConfig& cfg, Rng& rng,
                     bool train) {
    const size_t n = data.num_windows();
    std::vector<int> order =
        train ? shuffled_order(n, rng) : [&] {
            std::vector<int> o(n);
            for (size_t i = 0; i < n; ++i) o[i] = static_cast<int>(i);
            return o;
        }();

    BatchStats epoch;
    std::vector<Mat> grads;
    const size_t batch = static_cast<size_t>(std::max(1, cfg.batch));
    for (size_t begin = 0; begin < n; begin += batch) {
        const size_t end = std::min(begin + batch, n);
        const BatchStats s =
            eval_batch(params, order, begin, end, build, train, cfg.parallel, &grads);
        epoch.latent += s.latent;
        epoch.state += s.state;
        epoch.total += s.total;
        if (train) {
            const double inv = 1.0 / static_cast<double>(end - begin);
            for (Mat& g : grads) g *= inv;
            opt.step(params, grads);
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    epoch.latent *= inv_n;
    epoch.state *= inv_n;
    epoch.total *= inv_n;
    return epoch;
}

// Reconstruction training for one autoencoder over one channel.
std::vector<CurveRow> train_autoencoder(neural::GruEncoder& enc, neural::GruDecoder& dec,
                                        const Dataset& data,
                                        const std::function<Mat(const WindowRef&)>& channel,
                                        const TrainingConfig& cfg, uint64_t seed_salt) {
    ParamSet params;
    enc.collect("enc", params);
    dec.collect("dec", params);
    Adam opt(cfg.lr);
    Rng rng(cfg.seed ^ seed_salt);

    WindowBuilder build = [&](Tape& t, int w, double*, double*) {
        const Mat x = channel(data.windows[static_cast<size_t>(w)]);
        const Tape::Id input = t.constant(x);
        const Tape::Id latent = neural::encoder_forward(t, enc, input);
        const Tape::Id recon = neural::encoder_forward(t, dec, latent);
        const Tape::Id diff = t.sub(recon, input);
        return t.mean_all(t.hadamard(diff, diff));
    };

    std::vector<CurveRow> curve;
    const BatchStats init = run_epoch(params, opt, data, build, cfg, rng, false);
    curve.push_back({0, 0.0, init.total, init.total});
    for (int epoch = 1; epoch <= cfg.stage1_epochs; ++epoch) {
        const BatchStats s = run_epoch(params, opt, data, build, cfg, rng, true);
        curve.push_back({epoch, 0.0, s.total, s.total});
    }
    return curve;
}

}  // namespace

Stage1Result train_stage1(const Dataset& data, const TrainingConfig& config) {
    if (data.num_windows() < 100) {
        throw DataError("train_stage1: need at least 100 windows, got " +
                        std::to_string(data.num_windows()));
    }
    Stage1Result result;
    result.models.init(config.seed);
    result.curve_slip = train_autoencoder(
        result.models.enc_slip, result.models.dec_slip, data,
        [&](const WindowRef& w) { return data.window_slip(w); }, config, 0x736c6970ULL);
    result.curve_inekf = train_autoencoder(
        result.models.enc_inekf, result.models.dec_inekf, data,
        [&](const WindowRef& w) { return data.window_inekf(w); }, config, 0x696e656bULL);
    result.curve_err = train_autoencoder(
        result.models.enc_err, result.models.dec_err, data,
        [&](const WindowRef& w) { return data.window_err(w); }, config, 0x65727273ULL);
    return result;
}

Stage2Result train_stage2(const Dataset& data, const Stage1Result& stage1,
                          const TrainingConfig& config, Variant variant) {
    const bool end_to_end = variant == Variant::kEndToEnd;
    const double lambda1 = variant == Variant::kNoTeach ? 0.0 : config.lambda1;
    const int H = data.h_len;

    Stage2Result result;
    if (end_to_end) {
        result.model = AttenNc::from_scratch(variant, config.seed);
        result.teacher.init(config.seed);
    } else {
        result.model = AttenNc::assemble(variant, stage1.models, config.seed);
        result.teacher.enc = stage1.models.enc_err;
    }
    result.model.norm = data.norm;
    AttenNc& model = result.model;

    // Frozen-path latents are computed once per window.
    struct Cache {
        std::vector<Mat> z_inekf, z_slip, z_teacher;
    };
    Cache cache;
    const bool slip_on_tape = model.has_slip_lift();  // trainable lift
    if (!end_to_end) {
        const size_t n = data.num_windows();
        cache.z_inekf.resize(n);
        cache.z_teacher.resize(n);
        if (model.uses_slip_input() && !slip_on_tape) cache.z_slip.resize(n);
#pragma omp parallel for schedule(dynamic) if (config.parallel)
        for (size_t i = 0; i < n; ++i) {
            const WindowRef& w = data.windows[i];
            cache.z_inekf[i] = neural::plain_encoder(model.enc_inekf, data.window_inekf(w));
            cache.z_teacher[i] =
                neural::plain_encoder(result.teacher.enc, data.window_err(w));
            if (!cache.z_slip.empty()) {
                const Mat src = model.uses_foot_speed() ? data.window_speed(w)
                                                        : data.window_slip(w);
                cache.z_slip[i] = model.plain_slip_latent(src);
            }
        }
    }

    ParamSet params;
    model.collect_stage2(params, config.dec_lr_scale);
    if (end_to_end) result.teacher.enc.collect("teacher", params);

    WindowBuilder build = [&](Tape& t, int wi, double* latent_out, double* state_out) {
        const WindowRef& w = data.windows[static_cast<size_t>(wi)];
        const Mat err_window = data.window_err(w);

        Tape::Id z_inekf, z_teacher;
        Tape::Id z_query = -1;
        if (end_to_end) {
            z_inekf = neural::encoder_forward(t, model.enc_inekf, t.constant(data.window_inekf(w)));
            z_teacher = neural::encoder_forward(t, result.teacher.enc, t.constant(err_window));
            if (model.uses_slip_input()) {
                const Mat src =
                    model.uses_foot_speed() ? data.window_speed(w) : data.window_slip(w);
                z_query = model.slip_latent(t, t.constant(src));
            }
        } else {
            z_inekf = t.constant(cache.z_inekf[static_cast<size_t>(wi)]);
            z_teacher = t.constant(cache.z_teacher[static_cast<size_t>(wi)]);
            if (slip_on_tape) {
                const Mat src =
                    model.uses_foot_speed() ? data.window_speed(w) : data.window_slip(w);
                z_query = model.slip_latent(t, t.constant(src));
            } else if (!cache.z_slip.empty()) {
                z_query = t.constant(cache.z_slip[static_cast<size_t>(wi)]);
            }
        }

        const Tape::Id z_comp = model.comp_latent(t, z_query, z_inekf);
        const Tape::Id dec_seq = neural::encoder_forward(t, model.dec, z_comp);
        const Tape::Id last = t.row(dec_seq, H - 1);
        const Tape::Id l_state =
            neural::loss_state(t, last, err_window.row(H - 1), config.w_rot, config.w_vel,
                               config.w_pos);
        *state_out = t.val(l_state)(0, 0);

        if (lambda1 == 0.0) {
            *latent_out = 0.0;
            return t.scale(l_state, config.lambda2);
        }
        const Tape::Id l_latent = neural::loss_latent(t, z_teacher, z_comp);
        *latent_out = t.val(l_latent)(0, 0);
        return t.add(t.scale(l_latent, lambda1), t.scale(l_state, config.lambda2));
    };

    Adam opt(config.lr);
    Rng rng(config.seed ^ 0x73746732ULL);
    const BatchStats init = run_epoch(params, opt, data, build, config, rng, false);
    result.curve.push_back({0, init.latent, init.state,
                            lambda1 * init.latent + config.lambda2 * init.state});
    for (int epoch = 1; epoch <= config.stage2_epochs; ++epoch) {
        const BatchStats s = run_epoch(params, opt, data, build, config, rng, true);
        result.curve.push_back({epoch, s.latent, s.state,
                                lambda1 * s.latent + config.lambda2 * s.state});
    }
    return result;
}

}  // namespace ankf::comp
