// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ankf/sim/episode.hpp"

namespace ankf::sim {

// Deterministic trot-gait episode synthesis. IMU samples are tick-constant
// body rates and specific forces chosen so that exact per-tick strapdown
// integration reproduces the ground-truth trajectory.
Episode generate_episode(const EpisodeConfig& config, const RobotModel& model = RobotModel{});

}  // namespace ankf::sim
