// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "ankf/comp/attennc.hpp"
#include "ankf/filter/trace.hpp"
#include "ankf/sim/episode.hpp"

namespace ankf::comp {

// Per-episode channel streams, standardized by the dataset normalization.
struct EpisodeStreams {
    Mat x_in;    // T x 18, [x_std, dx_std]
    Mat slip;    // T x 4, standardized slip levels
    Mat speed;   // T x 4, standardized foot speeds
    Mat err;     // T x 9, standardized teacher targets e_t
};

struct WindowRef {
    int episode = 0;
    int start = 0;
};

struct Dataset {
    std::vector<EpisodeStreams> streams;
    std::vector<WindowRef> windows;
    Normalization norm;
    int h_len = Dims::kHistory;
    int stride = 25;

    size_t num_windows() const { return windows.size(); }
    Mat window_inekf(const WindowRef& w) const;
    Mat window_slip(const WindowRef& w) const;
    Mat window_speed(const WindowRef& w) const;
    Mat window_err(const WindowRef& w) const;
};

// Sliding windows over aligned (episode, trace) pairs. Teacher targets are
// the ground-truth error of the filter posterior per frame; all channels are
// standardized by train-set statistics stored in the returned dataset.
Dataset build_dataset(const std::vector<sim::Episode>& episodes,
                      const std::vector<filter::Trace>& traces, int h_len, int stride);

}  // namespace ankf::comp
