#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "prw/rng.hpp"

namespace prw {

// Point estimate with a 95% confidence interval.
struct EstimateResult {
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
    std::string method;
    bool lower_biased = false; // finite-horizon estimators only

    bool ci_overlaps(const EstimateResult& other) const {
        return ci_lo <= other.ci_hi && other.ci_lo <= ci_hi;
    }
};

// Accumulated first/second moments of a per-replication pair (v, w).
// Merging is exact when blocks are combined in a fixed order.
struct RepMoments {
    double sum_v = 0.0, sum_vv = 0.0;
    double sum_w = 0.0, sum_ww = 0.0;
    double sum_vw = 0.0;
    std::uint64_t n = 0;

    void add(double v, double w) {
        sum_v += v;
        sum_vv += v * v;
        sum_w += w;
        sum_ww += w * w;
        sum_vw += v * w;
        ++n;
    }

    void merge(const RepMoments& o) {
        sum_v += o.sum_v;
        sum_vv += o.sum_vv;
        sum_w += o.sum_w;
        sum_ww += o.sum_ww;
        sum_vw += o.sum_vw;
        n += o.n;
    }

    double mean_v() const { return sum_v / static_cast<double>(n); }
    double var_v() const {
        if (n < 2) return 0.0;
        const double nn = static_cast<double>(n);
        const double m = sum_v / nn;
        const double s = (sum_vv - nn * m * m) / (nn - 1.0);
        return s > 0.0 ? s : 0.0;
    }
    double se_v() const { return std::sqrt(var_v() / static_cast<double>(n)); }
};

unsigned default_workers();

constexpr double kZ95 = 1.959963984540054; // two-sided 95% normal quantile

// Runs `reps` independent replications. Replication i draws from
// substream(i) of the given seed, so the result is reproducible for any
// worker count: work is handed out in fixed blocks and block moments are
// reduced in block order.
template <class Fn>
RepMoments run_replications(std::uint64_t reps, std::uint64_t seed, unsigned workers, Fn&& fn) {
    constexpr std::uint64_t kBlock = 1024;
    const std::uint64_t n_blocks = (reps + kBlock - 1) / kBlock;
    std::vector<RepMoments> blocks(n_blocks);

    if (workers == 0) workers = default_workers();
    if (workers > n_blocks) workers = static_cast<unsigned>(n_blocks);

    auto worker = [&](std::atomic<std::uint64_t>& next) {
        for (;;) {
            const std::uint64_t blk = next.fetch_add(1, std::memory_order_relaxed);
            if (blk >= n_blocks) break;
            RepMoments acc;
            const std::uint64_t lo = blk * kBlock;
            const std::uint64_t hi = std::min(reps, lo + kBlock);
            for (std::uint64_t rep = lo; rep < hi; ++rep) {
                RandomStream stream(seed, rep);
                const auto [v, w] = fn(rep, stream);
                acc.add(v, w);
            }
            blocks[blk] = acc;
        }
    };

    if (workers <= 1) {
        std::atomic<std::uint64_t> next{0};
        worker(next);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back([&] { worker(next); });
        for (auto& th : pool) th.join();
    }

    RepMoments total;
    for (const auto& b : blocks) total.merge(b);
    return total;
}

// Mean estimator with a normal-approximation interval.
EstimateResult mean_estimate(const RepMoments& m, std::uint64_t seed, std::string method);

// Indicator-mean estimator: binomial standard error, Wilson 95% interval.
EstimateResult indicator_estimate(const RepMoments& m, std::uint64_t seed, std::string method);

// Parallel loop over [0, n) used by grid operators; fn(i) must be
// independent across indices.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    if (workers == 0) workers = default_workers();
    if (workers <= 1 || n < 256) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    constexpr std::size_t kChunk = 64;
    auto worker = [&] {
        for (;;) {
            const std::size_t lo = next.fetch_add(kChunk, std::memory_order_relaxed);
            if (lo >= n) break;
            const std::size_t hi = std::min(n, lo + kChunk);
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace prw
