#include "vabft/rng.hpp"

#include <cmath>
#include <numbers>

namespace vabft {

namespace {

constexpr uint32_t kMult0 = 0xD2511F53u;
constexpr uint32_t kMult1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<uint32_t, 4> round_once(const std::array<uint32_t, 4>& c,
                                          const std::array<uint32_t, 2>& k) {
    const uint64_t p0 = uint64_t(kMult0) * c[0];
    const uint64_t p1 = uint64_t(kMult1) * c[2];
    return {uint32_t(p1 >> 32) ^ c[1] ^ k[0], uint32_t(p1),
            uint32_t(p0 >> 32) ^ c[3] ^ k[1], uint32_t(p0)};
}

} // namespace

std::array<uint32_t, 4> Philox::block(const std::array<uint32_t, 4>& counter,
                                      const std::array<uint32_t, 2>& key) {
    std::array<uint32_t, 4> c = counter;
    std::array<uint32_t, 2> k = key;
    c = round_once(c, k);
    for (int r = 1; r < 10; ++r) {
        k[0] += kWeyl0;
        k[1] += kWeyl1;
        c = round_once(c, k);
    }
    return c;
}

Philox::Philox(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

void Philox::refill() {
    const std::array<uint32_t, 4> counter = {
        uint32_t(block_index_), uint32_t(block_index_ >> 32),
        uint32_t(stream_), uint32_t(stream_ >> 32)};
    const std::array<uint32_t, 2> key = {uint32_t(seed_), uint32_t(seed_ >> 32)};
    buf_ = block(counter, key);
    ++block_index_;
    pos_ = 0;
}

uint32_t Philox::next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
}

uint64_t Philox::next_u64() {
    const uint64_t lo = next_u32();
    const uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double Philox::next_double() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double Philox::uniform(double a, double b) {
    return a + (b - a) * next_double();
}

namespace {

// Marsaglia-Tsang ziggurat tables for the standard normal (128 layers).
struct ZigguratTables {
    uint32_t kn[128];
    double wn[128];
    double fn[128];
    ZigguratTables() {
        const double m1 = 2147483648.0;
        double dn = 3.442619855899, tn = dn;
        const double vn = 9.91256303526217e-3;
        const double q = vn / std::exp(-0.5 * dn * dn);
        kn[0] = uint32_t((dn / q) * m1);
        kn[1] = 0;
        wn[0] = q / m1;
        wn[127] = dn / m1;
        fn[0] = 1.0;
        fn[127] = std::exp(-0.5 * dn * dn);
        for (int i = 126; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
            kn[i + 1] = uint32_t((dn / tn) * m1);
            tn = dn;
            fn[i] = std::exp(-0.5 * dn * dn);
            wn[i] = dn / m1;
        }
    }
};

const ZigguratTables g_zig;

} // namespace

double Philox::normal() {
    constexpr double kTail = 3.442619855899;
    for (;;) {
        const int32_t hz = int32_t(next_u32());
        const int idx = hz & 127;
        if (std::abs(int64_t(hz)) < int64_t(g_zig.kn[idx])) return hz * g_zig.wn[idx];

        if (idx == 0) {
            // Tail beyond the base layer.
            for (;;) {
                const double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
                const double u2 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
                const double x = -std::log(u1) / kTail;
                const double y = -std::log(u2);
                if (y + y >= x * x) return hz > 0 ? kTail + x : -(kTail + x);
            }
        }
        const double x = hz * g_zig.wn[idx];
        if (g_zig.fn[idx] + next_double() * (g_zig.fn[idx - 1] - g_zig.fn[idx]) <
            std::exp(-0.5 * x * x))
            return x;
    }
}

double Philox::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

double Philox::truncated_normal(double mean, double stddev, double lo, double hi) {
    for (;;) {
        const double z = normal(mean, stddev);
        if (z >= lo && z <= hi) return z;
    }
}

uint64_t Philox::next_below(uint64_t n) {
    // Rejection keeps the draw unbiased.
    const uint64_t limit = n * (UINT64_MAX / n);
    for (;;) {
        const uint64_t v = next_u64();
        if (v < limit) return v % n;
    }
}

} // namespace vabft
