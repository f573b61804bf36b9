// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "ankf/neural/tape.hpp"

namespace ankf::neural {

// Versioned little-endian checkpoint: named blocks of row-major doubles
// plus a free-form JSON metadata string.
struct Checkpoint {
    std::map<std::string, Mat> blocks;
    std::string meta;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ankf::neural
