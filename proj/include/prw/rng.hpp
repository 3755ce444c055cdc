#pragma once

#include <cmath>
#include <cstdint>

namespace prw {

// Counter-based generator, Philox 4x32-10 (Salmon, Moraes, Dror, Shaw,
// "Parallel random numbers: as easy as 1, 2, 3", SC 2011).
//
// A stream is addressed by (seed, stream id). Replication i of a Monte
// Carlo run draws from substream i, so results are reproducible and do
// not depend on how replications are scheduled across threads.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : seed_(seed), stream_(stream) {}

    RandomStream substream(std::uint64_t index) const noexcept {
        return RandomStream(seed_, index);
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    std::uint64_t next_u64() {
        if (avail_ == 0) refill();
        --avail_;
        const int i = 2 * (1 - avail_);
        const std::uint64_t lo = block_[i];
        const std::uint64_t hi = block_[i + 1];
        return (hi << 32) | lo;
    }

    // Uniform variate strictly inside (0, 1); safe as a log() argument.
    double next_unit() {
        const std::uint64_t bits = next_u64() >> 11; // top 53 bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double next_exponential(double rate) { return -std::log(next_unit()) / rate; }

    // Standard normal via the Marsaglia polar method.
    double next_normal() {
        double u, v, s;
        do {
            u = 2.0 * next_unit() - 1.0;
            v = 2.0 * next_unit() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        return u * std::sqrt(-2.0 * std::log(s) / s);
    }

    // Smallest value next_unit() can produce: 2^-54.
    static constexpr double min_unit() { return 0x1.0p-54; }

private:
    static void round(std::uint32_t ctr[4], std::uint32_t k0, std::uint32_t k1) {
        const std::uint64_t p0 = 0xD2511F53ull * ctr[0];
        const std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        const std::uint32_t out0 = hi1 ^ ctr[1] ^ k0;
        const std::uint32_t out2 = hi0 ^ ctr[3] ^ k1;
        ctr[0] = out0;
        ctr[1] = lo1;
        ctr[2] = out2;
        ctr[3] = lo0;
    }

    void refill() {
        std::uint32_t ctr[4] = {
            static_cast<std::uint32_t>(pos_),
            static_cast<std::uint32_t>(pos_ >> 32),
            static_cast<std::uint32_t>(stream_),
            static_cast<std::uint32_t>(stream_ >> 32),
        };
        std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
        std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k0 += 0x9E3779B9u;
                k1 += 0xBB67AE85u;
            }
            round(ctr, k0, k1);
        }
        block_[0] = ctr[0];
        block_[1] = ctr[1];
        block_[2] = ctr[2];
        block_[3] = ctr[3];
        ++pos_;
        avail_ = 2;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t pos_ = 0;
    std::uint32_t block_[4] = {0, 0, 0, 0};
    int avail_ = 0;
};

} // namespace prw
