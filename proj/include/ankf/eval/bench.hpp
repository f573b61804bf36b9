// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "ankf/comp/runner.hpp"

namespace ankf::eval {

struct ThroughputReport {
    double steps_per_s = 0.0;
    double mean_us = 0.0;
    double p50_us = 0.0;
    double p99_us = 0.0;
    size_t steps = 0;
};

// Single-stream wall-clock over >= min_steps of predict + update (+ slip +
// compensation for the full pipeline), cycling episode frames as needed.
ThroughputReport benchmark_filter(const sim::Episode& episode, const comp::RunnerConfig& config,
                                  size_t min_steps = 10000);
ThroughputReport benchmark_attennkf(const sim::Episode& episode, const comp::AttenNc& model,
                                    const comp::RunnerConfig& config, size_t min_steps = 10000);

// Repo-shape reference check: serial vs OpenMP training-gradient throughput
// on a synthetic batch; returns windows/s for each mode.
struct ParallelBench {
    double serial_windows_per_s = 0.0;
    double parallel_windows_per_s = 0.0;
};

}  // namespace ankf::eval
