#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "slt/stablepath.hpp"

namespace slt {

// Binary skeleton dump, little-endian, layout:
//   bytes 0..7   magic "SLTSKEL1"
//   u32          format version (1)
//   u32          small-jump mode (0 drift-only, 1 gaussian)
//   f64 x5       alpha, a, T, eps, dt
//   u64 x2       master_seed, stream_index
//   u64 x2       jump count J, grid value count M
//   f64 x3 x J   jump records (t, x_pre, dx)
//   f64 x M      grid values

inline constexpr char kSkeletonMagic[8] = {'S', 'L', 'T', 'S', 'K', 'E', 'L', '1'};

inline void dump_skeleton(const PathSkeleton& path, const std::string& filename) {
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw std::runtime_error("dump_skeleton: cannot open " + filename);
    auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };

    out.write(kSkeletonMagic, 8);
    put_u32(1);
    put_u32(path.mode == SmallJumpMode::Gaussian ? 1u : 0u);
    put_f64(path.params.alpha);
    put_f64(path.params.a);
    put_f64(path.T);
    put_f64(path.eps);
    put_f64(path.dt);
    put_u64(path.master_seed);
    put_u64(path.stream_index);
    put_u64(path.jumps.size());
    put_u64(path.values.size());
    for (const auto& j : path.jumps) {
        put_f64(j.t);
        put_f64(j.x_pre);
        put_f64(j.dx);
    }
    for (double v : path.values) put_f64(v);
    if (!out) throw std::runtime_error("dump_skeleton: write failed for " + filename);
}

inline PathSkeleton load_skeleton(const std::string& filename) {
    std::ifstream in(filename, std::ios::binary);
    if (!in) throw std::runtime_error("load_skeleton: cannot open " + filename);
    auto get_u32 = [&]() {
        std::uint32_t v;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get_u64 = [&]() {
        std::uint64_t v;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    auto get_f64 = [&]() {
        double v;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };

    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kSkeletonMagic, 8) != 0)
        throw std::runtime_error("load_skeleton: bad magic in " + filename);
    const std::uint32_t version = get_u32();
    if (version != 1) throw std::runtime_error("load_skeleton: unsupported version");

    PathSkeleton path;
    path.mode = get_u32() == 1 ? SmallJumpMode::Gaussian : SmallJumpMode::DriftOnly;
    path.params.alpha = get_f64();
    path.params.a = get_f64();
    path.T = get_f64();
    path.eps = get_f64();
    path.dt = get_f64();
    path.master_seed = get_u64();
    path.stream_index = get_u64();
    const std::uint64_t jn = get_u64();
    const std::uint64_t vn = get_u64();
    path.jumps.resize(jn);
    for (auto& j : path.jumps) {
        j.t = get_f64();
        j.x_pre = get_f64();
        j.dx = get_f64();
    }
    path.values.resize(vn);
    for (auto& v : path.values) v = get_f64();
    if (!in) throw std::runtime_error("load_skeleton: truncated file " + filename);
    return path;
}

} // namespace slt
