// SPDX-License-Identifier: Apache-2.0
#include "ankf/comp/dataset.hpp"

#include <cmath>

#include "ankf/errors.hpp"
#include "ankf/lie.hpp"

namespace ankf::comp {

namespace {

// Channel std guard: constant channels standardize with unit scale.
Eigen::VectorXd safe_std(const Eigen::VectorXd& var) {
    Eigen::VectorXd s = var.cwiseMax(0.0).cwiseSqrt();
    for (int i = 0; i < s.size(); ++i) {
        if (s(i) < 1e-8) s(i) = 1.0;
    }
    return s;
}

void standardize(Mat& m, const Eigen::VectorXd& mean, const Eigen::VectorXd& std) {
    m.rowwise() -= mean.transpose();
    m.array().rowwise() /= std.transpose().array();
}

}  // namespace

Mat Dataset::window_inekf(const WindowRef& w) const {
    return streams[static_cast<size_t>(w.episode)].x_in.middleRows(w.start, h_len);
}
Mat Dataset::window_slip(const WindowRef& w) const {
    return streams[static_cast<size_t>(w.episode)].slip.middleRows(w.start, h_len);
}
Mat Dataset::window_speed(const WindowRef& w) const {
    return streams[static_cast<size_t>(w.episode)].speed.middleRows(w.start, h_len);
}
Mat Dataset::window_err(const WindowRef& w) const {
    return streams[static_cast<size_t>(w.episode)].err.middleRows(w.start, h_len);
}

Dataset build_dataset(const std::vector<sim::Episode>& episodes,
                      const std::vector<filter::Trace>& traces, int h_len, int stride) {
    if (episodes.size() != traces.size()) {
        throw DataError("build_dataset: episode/trace count mismatch");
    }
    if (h_len <= 0 || stride <= 0) throw ConfigError("build_dataset: h_len and stride must be > 0");

    Dataset ds;
    ds.h_len = h_len;
    ds.stride = stride;

    // Raw per-episode channels.
    struct Raw {
        Mat x, dx, slip, speed, err;
    };
    std::vector<Raw> raw(episodes.size());
    for (size_t e = 0; e < episodes.size(); ++e) {
        const sim::Episode& ep = episodes[e];
        const filter::Trace& tr = traces[e];
        if (ep.size() != tr.size()) {
            throw DataError("build_dataset: trace misaligned with episode " + std::to_string(e));
        }
        const int T = static_cast<int>(ep.size());
        Raw& r = raw[e];
        r.x.resize(T, 9);
        r.dx.resize(T, 9);
        r.slip.resize(T, 4);
        r.speed.resize(T, 4);
        r.err.resize(T, 9);
        for (int k = 0; k < T; ++k) {
            const filter::TraceFrame& f = tr.frames[static_cast<size_t>(k)];
            r.x.row(k) = f.x.transpose();
            r.dx.row(k) = f.dx.transpose();
            r.slip.row(k) = f.slip.transpose();
            r.speed.row(k) = f.foot_speed.transpose();
            // e_t: ground-truth error of the filter posterior.
            const sim::GroundTruthState& gt = ep.truth[static_cast<size_t>(k)];
            const Eigen::Matrix3d R_est = lie::exp_so3(f.x.segment<3>(0));
            r.err.row(k).segment<3>(0) = lie::log_so3(gt.R * R_est.transpose()).transpose();
            r.err.row(k).segment<3>(3) = (gt.v - f.x.segment<3>(3)).transpose();
            r.err.row(k).segment<3>(6) = (gt.p - f.x.segment<3>(6)).transpose();
        }
    }

    // Train-set statistics over all frames.
    auto accumulate = [&](auto getter, int dim, Eigen::VectorXd& mean, Eigen::VectorXd& stdv) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
        Eigen::VectorXd sum2 = Eigen::VectorXd::Zero(dim);
        double count = 0.0;
        for (const Raw& r : raw) {
            const Mat& m = getter(r);
            sum += m.colwise().sum().transpose();
            sum2 += m.array().square().colwise().sum().matrix().transpose();
            count += static_cast<double>(m.rows());
        }
        mean = sum / count;
        stdv = safe_std((sum2 / count - mean.cwiseProduct(mean)).eval());
    };

    Normalization& n = ds.norm;
    accumulate([](const Raw& r) -> const Mat& { return r.x; }, 9, n.mean_x, n.std_x);
    accumulate([](const Raw& r) -> const Mat& { return r.dx; }, 9, n.mean_dx, n.std_dx);
    accumulate([](const Raw& r) -> const Mat& { return r.slip; }, 4, n.mean_slip, n.std_slip);
    accumulate([](const Raw& r) -> const Mat& { return r.speed; }, 4, n.mean_speed, n.std_speed);
    accumulate([](const Raw& r) -> const Mat& { return r.err; }, 9, n.mean_err, n.std_err);

    ds.streams.resize(episodes.size());
    for (size_t e = 0; e < episodes.size(); ++e) {
        Raw& r = raw[e];
        standardize(r.x, n.mean_x, n.std_x);
        standardize(r.dx, n.mean_dx, n.std_dx);
        standardize(r.slip, n.mean_slip, n.std_slip);
        standardize(r.speed, n.mean_speed, n.std_speed);
        standardize(r.err, n.mean_err, n.std_err);
        EpisodeStreams& s = ds.streams[e];
        s.x_in.resize(r.x.rows(), 18);
        s.x_in << r.x, r.dx;
        s.slip = std::move(r.slip);
        s.speed = std::move(r.speed);
        s.err = std::move(r.err);

        const int T = static_cast<int>(episodes[e].size());
        for (int start = 0; start + h_len <= T; start += stride) {
            ds.windows.push_back({static_cast<int>(e), start});
        }
    }
    return ds;
}

}  // namespace ankf::comp
