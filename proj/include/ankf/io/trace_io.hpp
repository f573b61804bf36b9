// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ankf/filter/trace.hpp"

namespace ankf::io {

// Filter traces in the same dual JSONL/binary style as episodes. The header
// carries the estimator name and the config hash for provenance.
void save_trace(const std::string& path, const filter::Trace& trace,
                const std::string& estimator, const std::string& config_hash);

struct LoadedTrace {
    filter::Trace trace;
    std::string estimator;
    std::string config_hash;
};

LoadedTrace load_trace(const std::string& path);

}  // namespace ankf::io
