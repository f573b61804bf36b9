// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ankf/sim/episode.hpp"

namespace ankf::io {

// Episode files carry a header record (config echo, model, schema version)
// followed by per-frame records. Two interchangeable encodings, chosen by
// extension: .jsonl (one object per line) and .bin (packed little-endian,
// fixed field order). Both round-trip doubles losslessly.
void save_episode(const std::string& path, const sim::Episode& episode);
sim::Episode load_episode(const std::string& path);

}  // namespace ankf::io
