// SPDX-License-Identifier: Apache-2.0
#include "ankf/io/config.hpp"

#include <fstream>
#include <sstream>

#include "ankf/errors.hpp"

namespace ankf::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        }
        cfg.kv_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

std::string Config::get_str(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a number: " + it->second);
    }
}

int64_t Config::get_int(const std::string& key, int64_t fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        size_t pos = 0;
        const int64_t v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not an integer: " + it->second);
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ConfigError("config key " + key + ": not a boolean: " + it->second);
}

std::vector<std::vector<double>> Config::get_tuples(const std::string& key) const {
    std::vector<std::vector<double>> out;
    const auto it = kv_.find(key);
    if (it == kv_.end()) return out;
    std::istringstream groups(it->second);
    std::string group;
    while (std::getline(groups, group, ';')) {
        group = trim(group);
        if (group.empty()) continue;
        std::istringstream fields(group);
        std::vector<double> tuple;
        double v = 0.0;
        while (fields >> v) tuple.push_back(v);
        if (!fields.eof()) {
            throw ConfigError("config key " + key + ": bad tuple: " + group);
        }
        out.push_back(std::move(tuple));
    }
    return out;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : kv_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

uint64_t Config::hash() const {
    // FNV-1a over the canonical serialization.
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : canonical()) {
        h ^= static_cast<uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string Config::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

sim::EpisodeConfig episode_config_from(const Config& cfg) {
    sim::EpisodeConfig ec;
    ec.duration_s = cfg.get_double("episode.duration_s", ec.duration_s);
    ec.rate_hz = cfg.get_double("episode.rate_hz", ec.rate_hz);
    ec.seed = static_cast<uint64_t>(cfg.get_int("episode.seed", 0));
    ec.contact_accuracy = cfg.get_double("episode.contact_accuracy", ec.contact_accuracy);
    ec.gait.step_freq_hz = cfg.get_double("episode.gait.step_freq_hz", ec.gait.step_freq_hz);
    ec.gait.step_height_m = cfg.get_double("episode.gait.step_height_m", ec.gait.step_height_m);
    ec.gait.duty_factor = cfg.get_double("episode.gait.duty_factor", ec.gait.duty_factor);
    ec.gait.body_height_m = cfg.get_double("episode.gait.body_height_m", ec.gait.body_height_m);
    ec.noise.gyro_std = cfg.get_double("episode.noise.gyro_std", ec.noise.gyro_std);
    ec.noise.accel_std = cfg.get_double("episode.noise.accel_std", ec.noise.accel_std);
    ec.noise.joint_pos_std = cfg.get_double("episode.noise.joint_pos_std", ec.noise.joint_pos_std);
    ec.noise.joint_vel_std = cfg.get_double("episode.noise.joint_vel_std", ec.noise.joint_vel_std);
    ec.noise.gyro_bias_walk = cfg.get_double("episode.noise.gyro_bias_walk", ec.noise.gyro_bias_walk);
    ec.noise.accel_bias_walk =
        cfg.get_double("episode.noise.accel_bias_walk", ec.noise.accel_bias_walk);

    const auto commands = cfg.get_tuples("episode.commands");
    if (!commands.empty()) {
        ec.commands.clear();
        for (const auto& t : commands) {
            if (t.size() != 4) {
                throw ConfigError("episode.commands: expected 't vx vy wz' tuples");
            }
            ec.commands.push_back({t[0], t[1], t[2], t[3]});
        }
    }
    const auto slips = cfg.get_tuples("episode.slip_segments");
    for (const auto& t : slips) {
        if (t.size() != 3 && t.size() != 7) {
            throw ConfigError(
                "episode.slip_segments: expected 't0 t1 scale [fl fr rl rr]' tuples");
        }
        sim::SlipSegment seg;
        seg.t_start = t[0];
        seg.t_end = t[1];
        seg.slip_vel_scale = t[2];
        if (t.size() == 7) {
            for (int i = 0; i < 4; ++i) seg.feet[static_cast<size_t>(i)] = t[3 + i] != 0.0;
        }
        ec.slip.push_back(seg);
    }
    return ec;
}

filter::NoiseParams noise_params_from(const Config& cfg) {
    filter::NoiseParams np;
    np.gyro_std = cfg.get_double("filter.gyro_std", np.gyro_std);
    np.accel_std = cfg.get_double("filter.accel_std", np.accel_std);
    np.gyro_bias_std = cfg.get_double("filter.gyro_bias_std", np.gyro_bias_std);
    np.accel_bias_std = cfg.get_double("filter.accel_bias_std", np.accel_bias_std);
    np.contact_std = cfg.get_double("filter.contact_std", np.contact_std);
    np.meas_std = cfg.get_double("filter.meas_std", np.meas_std);
    return np;
}

slip::SlipParams slip_params_from(const Config& cfg) {
    slip::SlipParams sp;
    sp.k = cfg.get_double("slip.k", sp.k);
    sp.v_th = cfg.get_double("slip.v_th", sp.v_th);
    return sp;
}

filter::SlipRejectionConfig sr_config_from(const Config& cfg) {
    filter::SlipRejectionConfig sr;
    sr.lv_threshold = cfg.get_double("sr.lv_threshold", sr.lv_threshold);
    sr.inflation_factor = cfg.get_double("sr.inflation_factor", sr.inflation_factor);
    sr.reject_entirely = cfg.get_bool("sr.reject_entirely", sr.reject_entirely);
    return sr;
}

comp::TrainingConfig training_config_from(const Config& cfg) {
    comp::TrainingConfig tc;
    tc.lambda1 = cfg.get_double("train.lambda1", tc.lambda1);
    tc.lambda2 = cfg.get_double("train.lambda2", tc.lambda2);
    tc.w_rot = cfg.get_double("train.w_rot", tc.w_rot);
    tc.w_vel = cfg.get_double("train.w_vel", tc.w_vel);
    tc.w_pos = cfg.get_double("train.w_pos", tc.w_pos);
    tc.lr = cfg.get_double("train.lr", tc.lr);
    tc.dec_lr_scale = cfg.get_double("train.dec_lr_scale", tc.dec_lr_scale);
    tc.stage1_epochs = static_cast<int>(cfg.get_int("train.stage1_epochs", tc.stage1_epochs));
    tc.stage2_epochs = static_cast<int>(cfg.get_int("train.stage2_epochs", tc.stage2_epochs));
    tc.batch = static_cast<int>(cfg.get_int("train.batch", tc.batch));
    tc.seed = static_cast<uint64_t>(cfg.get_int("train.seed", 0));
    tc.parallel = cfg.get_bool("train.parallel", tc.parallel);
    return tc;
}

comp::RunnerConfig runner_config_from(const Config& cfg) {
    comp::RunnerConfig rc;
    rc.noise = noise_params_from(cfg);
    rc.slip = slip_params_from(cfg);
    rc.sr = sr_config_from(cfg);
    rc.clamp_rot = cfg.get_double("comp.clamp_rot", rc.clamp_rot);
    rc.clamp_pos = cfg.get_double("comp.clamp_pos", rc.clamp_pos);
    return rc;
}

}  // namespace ankf::io
