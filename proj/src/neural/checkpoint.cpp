// SPDX-License-Identifier: Apache-2.0
#include "ankf/neural/checkpoint.hpp"

#include <cstdint>
#include <fstream>

#include "ankf/errors.hpp"

namespace ankf::neural {

namespace {

constexpr char kMagic[4] = {'A', 'N', 'K', 'F'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::istream& is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("save_checkpoint: cannot open " + path);
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, static_cast<uint32_t>(ckpt.blocks.size()));
    for (const auto& [name, m] : ckpt.blocks) {
        write_u32(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(os, static_cast<uint32_t>(m.rows()));
        write_u32(os, static_cast<uint32_t>(m.cols()));
        for (int r = 0; r < m.rows(); ++r) {
            for (int c = 0; c < m.cols(); ++c) {
                const double v = m(r, c);
                os.write(reinterpret_cast<const char*>(&v), sizeof(v));
            }
        }
    }
    write_u32(os, static_cast<uint32_t>(ckpt.meta.size()));
    os.write(ckpt.meta.data(), static_cast<std::streamsize>(ckpt.meta.size()));
    if (!os) throw DataError("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("load_checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != std::string(kMagic, 4)) {
        throw DataError("load_checkpoint: bad magic in " + path);
    }
    if (read_u32(is) != kVersion) throw DataError("load_checkpoint: unsupported version");
    Checkpoint ckpt;
    const uint32_t count = read_u32(is);
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t name_len = read_u32(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const uint32_t rows = read_u32(is);
        const uint32_t cols = read_u32(is);
        Mat m(rows, cols);
        for (uint32_t r = 0; r < rows; ++r) {
            for (uint32_t c = 0; c < cols; ++c) {
                double v = 0;
                is.read(reinterpret_cast<char*>(&v), sizeof(v));
                m(r, c) = v;
            }
        }
        ckpt.blocks.emplace(std::move(name), std::move(m));
    }
    const uint32_t meta_len = read_u32(is);
    ckpt.meta.resize(meta_len);
    is.read(ckpt.meta.data(), meta_len);
    if (!is) throw DataError("load_checkpoint: truncated file " + path);
    return ckpt;
}

}  // namespace ankf::neural
