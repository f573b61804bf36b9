// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ankf/comp/runner.hpp"
#include "ankf/comp/train.hpp"
#include "ankf/sim/episode.hpp"

namespace ankf::io {

// Plain-text key-value config with INI-style nested sections:
//   [sim.gait]
//   step_freq_hz = 2.0
// flattens to "sim.gait.step_freq_hz". Lists of tuples use entries
// separated by ';' with space-separated fields.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::vector<double>> get_tuples(const std::string& key) const;

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    // Sorted key=value lines; the provenance hash every artifact embeds.
    std::string canonical() const;
    uint64_t hash() const;
    std::string hash_hex() const;

private:
    std::map<std::string, std::string> kv_;
};

// Section readers; absent keys keep the struct defaults.
sim::EpisodeConfig episode_config_from(const Config& cfg);
filter::NoiseParams noise_params_from(const Config& cfg);
slip::SlipParams slip_params_from(const Config& cfg);
filter::SlipRejectionConfig sr_config_from(const Config& cfg);
comp::TrainingConfig training_config_from(const Config& cfg);
comp::RunnerConfig runner_config_from(const Config& cfg);

}  // namespace ankf::io
