#pragma once

#include <array>
#include <cstdint>

namespace vabft {

/// Counter-based PRNG (Philox4x32, 10 rounds). Streams are independent
/// counter subspaces, so trial `i` of a campaign draws from
/// `Philox(seed, i)` and results do not depend on thread scheduling.
class Philox {
public:
    explicit Philox(uint64_t seed, uint64_t stream = 0);

    uint32_t next_u32();
    uint64_t next_u64();

    /// Uniform in [0, 1), 53 random bits.
    double next_double();

    /// Uniform in [a, b).
    double uniform(double a, double b);

    /// Standard normal via the ziggurat method.
    double normal();
    double normal(double mean, double stddev);

    /// Rejection-sampled normal(mean, stddev) restricted to [lo, hi].
    double truncated_normal(double mean, double stddev, double lo, double hi);

    /// Uniform integer in [0, n).
    uint64_t next_below(uint64_t n);

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }

    /// One raw block, exposed for known-answer tests.
    static std::array<uint32_t, 4> block(const std::array<uint32_t, 4>& counter,
                                         const std::array<uint32_t, 2>& key);

private:
    void refill();

    uint64_t seed_ = 0;
    uint64_t stream_ = 0;
    uint64_t block_index_ = 0;
    std::array<uint32_t, 4> buf_{};
    int pos_ = 4;
};

} // namespace vabft
