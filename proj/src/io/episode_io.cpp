// SPDX-License-Identifier: Apache-2.0
#include "ankf/io/episode_io.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>

#include "ankf/errors.hpp"

namespace ankf::io {

using nlohmann::json;

namespace {

constexpr char kBinMagic[4] = {'A', 'N', 'K', 'E'};
constexpr uint32_t kBinVersion = 1;
// Per-frame payload: t, gyro(3), accel(3), jp(12), jv(12) | R(9), v(3), p(3),
// fp(12), fv(12) doubles plus 8 contact bytes.
constexpr size_t kFrameDoubles = 1 + 3 + 3 + 12 + 12 + 9 + 3 + 3 + 12 + 12;

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json config_to_json(const sim::EpisodeConfig& c) {
    json j;
    j["duration_s"] = c.duration_s;
    j["rate_hz"] = c.rate_hz;
    j["seed"] = c.seed;
    j["contact_accuracy"] = c.contact_accuracy;
    j["gait"] = {{"step_freq_hz", c.gait.step_freq_hz},
                 {"step_height_m", c.gait.step_height_m},
                 {"duty_factor", c.gait.duty_factor},
                 {"body_height_m", c.gait.body_height_m}};
    j["noise"] = {{"gyro_std", c.noise.gyro_std},
                  {"accel_std", c.noise.accel_std},
                  {"joint_pos_std", c.noise.joint_pos_std},
                  {"joint_vel_std", c.noise.joint_vel_std},
                  {"gyro_bias_walk", c.noise.gyro_bias_walk},
                  {"accel_bias_walk", c.noise.accel_bias_walk}};
    j["commands"] = json::array();
    for (const auto& cmd : c.commands) {
        j["commands"].push_back({cmd.t_start, cmd.vx, cmd.vy, cmd.wz});
    }
    j["slip"] = json::array();
    for (const auto& s : c.slip) {
        j["slip"].push_back({{"t_start", s.t_start},
                             {"t_end", s.t_end},
                             {"scale", s.slip_vel_scale},
                             {"feet", {s.feet[0], s.feet[1], s.feet[2], s.feet[3]}}});
    }
    return j;
}

sim::EpisodeConfig config_from_json(const json& j) {
    sim::EpisodeConfig c;
    c.duration_s = j.at("duration_s");
    c.rate_hz = j.at("rate_hz");
    c.seed = j.at("seed");
    c.contact_accuracy = j.at("contact_accuracy");
    const json& g = j.at("gait");
    c.gait = {g.at("step_freq_hz"), g.at("step_height_m"), g.at("duty_factor"),
              g.at("body_height_m")};
    const json& n = j.at("noise");
    c.noise = {n.at("gyro_std"),       n.at("accel_std"),      n.at("joint_pos_std"),
               n.at("joint_vel_std"),  n.at("gyro_bias_walk"), n.at("accel_bias_walk")};
    c.commands.clear();
    for (const auto& cmd : j.at("commands")) {
        c.commands.push_back({cmd.at(0), cmd.at(1), cmd.at(2), cmd.at(3)});
    }
    for (const auto& s : j.at("slip")) {
        sim::SlipSegment seg;
        seg.t_start = s.at("t_start");
        seg.t_end = s.at("t_end");
        seg.slip_vel_scale = s.at("scale");
        for (int i = 0; i < 4; ++i) seg.feet[static_cast<size_t>(i)] = s.at("feet").at(i);
        c.slip.push_back(seg);
    }
    return c;
}

json model_to_json(const sim::RobotModel& m) {
    json j;
    j["thigh_len"] = m.thigh_len;
    j["shank_len"] = m.shank_len;
    j["hip_yaw_offset"] = m.hip_yaw_offset;
    j["hip_offsets"] = json::array();
    for (const auto& h : m.hip_offsets) j["hip_offsets"].push_back({h.x(), h.y(), h.z()});
    return j;
}

sim::RobotModel model_from_json(const json& j) {
    sim::RobotModel m;
    m.thigh_len = j.at("thigh_len");
    m.shank_len = j.at("shank_len");
    m.hip_yaw_offset = j.at("hip_yaw_offset");
    for (int i = 0; i < 4; ++i) {
        const auto& h = j.at("hip_offsets").at(i);
        m.hip_offsets[static_cast<size_t>(i)] =
            Eigen::Vector3d(h.at(0).get<double>(), h.at(1).get<double>(), h.at(2).get<double>());
    }
    return m;
}

template <typename Derived>
json vec_to_json(const Eigen::MatrixBase<Derived>& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

void save_jsonl(const std::string& path, const sim::Episode& ep) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("save_episode: cannot open " + path);
    json header;
    header["schema"] = "ankf-episode-v1";
    header["n"] = ep.size();
    header["config"] = config_to_json(ep.config);
    header["model"] = model_to_json(ep.model);
    os << header.dump() << '\n';
    for (size_t k = 0; k < ep.size(); ++k) {
        const auto& f = ep.frames[k];
        const auto& gt = ep.truth[k];
        json j;
        j["t"] = f.t;
        j["gyro"] = vec_to_json(f.gyro);
        j["accel"] = vec_to_json(f.accel);
        j["jp"] = vec_to_json(f.joint_pos);
        j["jv"] = vec_to_json(f.joint_vel);
        j["ce"] = {f.contact_est[0], f.contact_est[1], f.contact_est[2], f.contact_est[3]};
        j["cg"] = {f.contact_gt[0], f.contact_gt[1], f.contact_gt[2], f.contact_gt[3]};
        json R = json::array();
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) R.push_back(gt.R(r, c));
        }
        j["R"] = std::move(R);
        j["v"] = vec_to_json(gt.v);
        j["p"] = vec_to_json(gt.p);
        json fp = json::array(), fv = json::array();
        for (int leg = 0; leg < 4; ++leg) {
            for (int i = 0; i < 3; ++i) {
                fp.push_back(gt.foot_pos_w[static_cast<size_t>(leg)](i));
                fv.push_back(gt.foot_vel_w[static_cast<size_t>(leg)](i));
            }
        }
        j["fp"] = std::move(fp);
        j["fv"] = std::move(fv);
        os << j.dump() << '\n';
    }
    if (!os) throw DataError("save_episode: write failed for " + path);
}

sim::Episode load_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("load_episode: cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw DataError("load_episode: empty file " + path);
    json header = json::parse(line);
    if (header.at("schema") != "ankf-episode-v1") {
        throw DataError("load_episode: unexpected schema in " + path);
    }
    sim::Episode ep;
    ep.config = config_from_json(header.at("config"));
    ep.model = model_from_json(header.at("model"));
    const size_t n = header.at("n");
    ep.frames.resize(n);
    ep.truth.resize(n);
    for (size_t k = 0; k < n; ++k) {
        if (!std::getline(is, line)) throw DataError("load_episode: truncated " + path);
        json j = json::parse(line);
        auto& f = ep.frames[k];
        auto& gt = ep.truth[k];
        f.t = j.at("t");
        for (int i = 0; i < 3; ++i) f.gyro(i) = j.at("gyro").at(i);
        for (int i = 0; i < 3; ++i) f.accel(i) = j.at("accel").at(i);
        for (int i = 0; i < 12; ++i) f.joint_pos(i) = j.at("jp").at(i);
        for (int i = 0; i < 12; ++i) f.joint_vel(i) = j.at("jv").at(i);
        for (int i = 0; i < 4; ++i) {
            f.contact_est[static_cast<size_t>(i)] = j.at("ce").at(i);
            f.contact_gt[static_cast<size_t>(i)] = j.at("cg").at(i);
        }
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) gt.R(r, c) = j.at("R").at(3 * r + c);
        }
        for (int i = 0; i < 3; ++i) gt.v(i) = j.at("v").at(i);
        for (int i = 0; i < 3; ++i) gt.p(i) = j.at("p").at(i);
        for (int leg = 0; leg < 4; ++leg) {
            for (int i = 0; i < 3; ++i) {
                gt.foot_pos_w[static_cast<size_t>(leg)](i) = j.at("fp").at(3 * leg + i);
                gt.foot_vel_w[static_cast<size_t>(leg)](i) = j.at("fv").at(3 * leg + i);
            }
        }
    }
    return ep;
}

void save_bin(const std::string& path, const sim::Episode& ep) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("save_episode: cannot open " + path);
    json header;
    header["schema"] = "ankf-episode-v1";
    header["n"] = ep.size();
    header["config"] = config_to_json(ep.config);
    header["model"] = model_to_json(ep.model);
    const std::string htext = header.dump();
    os.write(kBinMagic, 4);
    const uint32_t ver = kBinVersion;
    os.write(reinterpret_cast<const char*>(&ver), 4);
    const uint32_t hlen = static_cast<uint32_t>(htext.size());
    os.write(reinterpret_cast<const char*>(&hlen), 4);
    os.write(htext.data(), hlen);

    std::vector<double> buf(kFrameDoubles);
    for (size_t k = 0; k < ep.size(); ++k) {
        const auto& f = ep.frames[k];
        const auto& gt = ep.truth[k];
        size_t i = 0;
        buf[i++] = f.t;
        for (int c = 0; c < 3; ++c) buf[i++] = f.gyro(c);
        for (int c = 0; c < 3; ++c) buf[i++] = f.accel(c);
        for (int c = 0; c < 12; ++c) buf[i++] = f.joint_pos(c);
        for (int c = 0; c < 12; ++c) buf[i++] = f.joint_vel(c);
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) buf[i++] = gt.R(r, c);
        }
        for (int c = 0; c < 3; ++c) buf[i++] = gt.v(c);
        for (int c = 0; c < 3; ++c) buf[i++] = gt.p(c);
        for (int leg = 0; leg < 4; ++leg) {
            for (int c = 0; c < 3; ++c) buf[i++] = gt.foot_pos_w[static_cast<size_t>(leg)](c);
        }
        for (int leg = 0; leg < 4; ++leg) {
            for (int c = 0; c < 3; ++c) buf[i++] = gt.foot_vel_w[static_cast<size_t>(leg)](c);
        }
        os.write(reinterpret_cast<const char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size() * sizeof(double)));
        char contacts[8];
        for (int leg = 0; leg < 4; ++leg) {
            contacts[leg] = f.contact_est[static_cast<size_t>(leg)] ? 1 : 0;
            contacts[4 + leg] = f.contact_gt[static_cast<size_t>(leg)] ? 1 : 0;
        }
        os.write(contacts, 8);
    }
    if (!os) throw DataError("save_episode: write failed for " + path);
}

sim::Episode load_bin(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("load_episode: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kBinMagic, 4) != 0) {
        throw DataError("load_episode: bad magic in " + path);
    }
    uint32_t ver = 0, hlen = 0;
    is.read(reinterpret_cast<char*>(&ver), 4);
    is.read(reinterpret_cast<char*>(&hlen), 4);
    if (ver != kBinVersion) throw DataError("load_episode: unsupported version");
    std::string htext(hlen, '\0');
    is.read(htext.data(), hlen);
    json header = json::parse(htext);

    sim::Episode ep;
    ep.config = config_from_json(header.at("config"));
    ep.model = model_from_json(header.at("model"));
    const size_t n = header.at("n");
    ep.frames.resize(n);
    ep.truth.resize(n);
    std::vector<double> buf(kFrameDoubles);
    for (size_t k = 0; k < n; ++k) {
        is.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(double)));
        char contacts[8];
        is.read(contacts, 8);
        if (!is) throw DataError("load_episode: truncated " + path);
        auto& f = ep.frames[k];
        auto& gt = ep.truth[k];
        size_t i = 0;
        f.t = buf[i++];
        for (int c = 0; c < 3; ++c) f.gyro(c) = buf[i++];
        for (int c = 0; c < 3; ++c) f.accel(c) = buf[i++];
        for (int c = 0; c < 12; ++c) f.joint_pos(c) = buf[i++];
        for (int c = 0; c < 12; ++c) f.joint_vel(c) = buf[i++];
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) gt.R(r, c) = buf[i++];
        }
        for (int c = 0; c < 3; ++c) gt.v(c) = buf[i++];
        for (int c = 0; c < 3; ++c) gt.p(c) = buf[i++];
        for (int leg = 0; leg < 4; ++leg) {
            for (int c = 0; c < 3; ++c) gt.foot_pos_w[static_cast<size_t>(leg)](c) = buf[i++];
        }
        for (int leg = 0; leg < 4; ++leg) {
            for (int c = 0; c < 3; ++c) gt.foot_vel_w[static_cast<size_t>(leg)](c) = buf[i++];
        }
        for (int leg = 0; leg < 4; ++leg) {
            f.contact_est[static_cast<size_t>(leg)] = contacts[leg] != 0;
            f.contact_gt[static_cast<size_t>(leg)] = contacts[4 + leg] != 0;
        }
    }
    return ep;
}

}  // namespace

void save_episode(const std::string& path, const sim::Episode& episode) {
    if (ends_with(path, ".bin")) {
        save_bin(path, episode);
    } else {
        save_jsonl(path, episode);
    }
}

sim::Episode load_episode(const std::string& path) {
    if (ends_with(path, ".bin")) return load_bin(path);
    return load_jsonl(path);
}

}  // namespace ankf::io
