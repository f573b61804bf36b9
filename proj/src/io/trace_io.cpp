// SPDX-License-Identifier: Apache-2.0
#include "ankf/io/trace_io.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>

#include "ankf/errors.hpp"

namespace ankf::io {

using nlohmann::json;

namespace {

constexpr char kBinMagic[4] = {'A', 'N', 'K', 'T'};
constexpr uint32_t kBinVersion = 1;
// t, x(9), dx(9), p_diag(27), slip(4), foot_speed(4), x_comp(9).
constexpr size_t kFrameDoubles = 1 + 9 + 9 + filter::kStateDim + 4 + 4 + 9;

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json header_json(const filter::Trace& trace, const std::string& estimator,
                 const std::string& config_hash) {
    json h;
    h["schema"] = "ankf-trace-v1";
    h["n"] = trace.size();
    h["estimator"] = estimator;
    h["config_hash"] = config_hash;
    return h;
}

}  // namespace

void save_trace(const std::string& path, const filter::Trace& trace,
                const std::string& estimator, const std::string& config_hash) {
    if (ends_with(path, ".bin")) {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw DataError("save_trace: cannot open " + path);
        const std::string htext = header_json(trace, estimator, config_hash).dump();
        os.write(kBinMagic, 4);
        const uint32_t ver = kBinVersion;
        os.write(reinterpret_cast<const char*>(&ver), 4);
        const uint32_t hlen = static_cast<uint32_t>(htext.size());
        os.write(reinterpret_cast<const char*>(&hlen), 4);
        os.write(htext.data(), hlen);
        std::vector<double> buf(kFrameDoubles);
        for (const auto& f : trace.frames) {
            size_t i = 0;
            buf[i++] = f.t;
            for (int c = 0; c < 9; ++c) buf[i++] = f.x(c);
            for (int c = 0; c < 9; ++c) buf[i++] = f.dx(c);
            for (int c = 0; c < filter::kStateDim; ++c) buf[i++] = f.p_diag(c);
            for (int c = 0; c < 4; ++c) buf[i++] = f.slip(c);
            for (int c = 0; c < 4; ++c) buf[i++] = f.foot_speed(c);
            for (int c = 0; c < 9; ++c) buf[i++] = f.x_comp(c);
            os.write(reinterpret_cast<const char*>(buf.data()),
                     static_cast<std::streamsize>(buf.size() * sizeof(double)));
            char flags[5];
            for (int leg = 0; leg < 4; ++leg) flags[leg] = f.active[static_cast<size_t>(leg)];
            flags[4] = f.compensated ? 1 : 0;
            os.write(flags, 5);
        }
        if (!os) throw DataError("save_trace: write failed for " + path);
        return;
    }

    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("save_trace: cannot open " + path);
    os << header_json(trace, estimator, config_hash).dump() << '\n';
    for (const auto& f : trace.frames) {
        json j;
        j["t"] = f.t;
        auto put = [&](const char* key, const auto& v) {
            json a = json::array();
            for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
            j[key] = std::move(a);
        };
        put("x", f.x);
        put("dx", f.dx);
        put("pd", f.p_diag);
        put("slip", f.slip);
        put("fs", f.foot_speed);
        put("xc", f.x_comp);
        j["act"] = {f.active[0], f.active[1], f.active[2], f.active[3]};
        j["comp"] = f.compensated;
        os << j.dump() << '\n';
    }
    if (!os) throw DataError("save_trace: write failed for " + path);
}

LoadedTrace load_trace(const std::string& path) {
    LoadedTrace out;
    if (ends_with(path, ".bin")) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw DataError("load_trace: cannot open " + path);
        char magic[4];
        is.read(magic, 4);
        if (!is || std::memcmp(magic, kBinMagic, 4) != 0) {
            throw DataError("load_trace: bad magic in " + path);
        }
        uint32_t ver = 0, hlen = 0;
        is.read(reinterpret_cast<char*>(&ver), 4);
        is.read(reinterpret_cast<char*>(&hlen), 4);
        if (ver != kBinVersion) throw DataError("load_trace: unsupported version");
        std::string htext(hlen, '\0');
        is.read(htext.data(), hlen);
        const json h = json::parse(htext);
        out.estimator = h.at("estimator");
        out.config_hash = h.at("config_hash");
        const size_t n = h.at("n");
        out.trace.frames.resize(n);
        std::vector<double> buf(kFrameDoubles);
        for (size_t k = 0; k < n; ++k) {
            is.read(reinterpret_cast<char*>(buf.data()),
                    static_cast<std::streamsize>(buf.size() * sizeof(double)));
            char flags[5];
            is.read(flags, 5);
            if (!is) throw DataError("load_trace: truncated " + path);
            auto& f = out.trace.frames[k];
            size_t i = 0;
            f.t = buf[i++];
            for (int c = 0; c < 9; ++c) f.x(c) = buf[i++];
            for (int c = 0; c < 9; ++c) f.dx(c) = buf[i++];
            for (int c = 0; c < filter::kStateDim; ++c) f.p_diag(c) = buf[i++];
            for (int c = 0; c < 4; ++c) f.slip(c) = buf[i++];
            for (int c = 0; c < 4; ++c) f.foot_speed(c) = buf[i++];
            for (int c = 0; c < 9; ++c) f.x_comp(c) = buf[i++];
            for (int leg = 0; leg < 4; ++leg) f.active[static_cast<size_t>(leg)] = flags[leg];
            f.compensated = flags[4] != 0;
        }
        return out;
    }

    std::ifstream is(path);
    if (!is) throw DataError("load_trace: cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw DataError("load_trace: empty file " + path);
    const json h = json::parse(line);
    if (h.at("schema") != "ankf-trace-v1") throw DataError("load_trace: unexpected schema");
    out.estimator = h.at("estimator");
    out.config_hash = h.at("config_hash");
    const size_t n = h.at("n");
    out.trace.frames.resize(n);
    for (size_t k = 0; k < n; ++k) {
        if (!std::getline(is, line)) throw DataError("load_trace: truncated " + path);
        const json j = json::parse(line);
        auto& f = out.trace.frames[k];
        f.t = j.at("t");
        for (int c = 0; c < 9; ++c) f.x(c) = j.at("x").at(c);
        for (int c = 0; c < 9; ++c) f.dx(c) = j.at("dx").at(c);
        for (int c = 0; c < filter::kStateDim; ++c) f.p_diag(c) = j.at("pd").at(c);
        for (int c = 0; c < 4; ++c) f.slip(c) = j.at("slip").at(c);
        for (int c = 0; c < 4; ++c) f.foot_speed(c) = j.at("fs").at(c);
        for (int c = 0; c < 9; ++c) f.x_comp(c) = j.at("xc").at(c);
        for (int leg = 0; leg < 4; ++leg) f.active[static_cast<size_t>(leg)] = j.at("act").at(leg);
        f.compensated = j.at("comp");
    }
    return out;
}

}  // namespace ankf::io
