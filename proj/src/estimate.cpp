#include "prw/estimate.hpp"

#include <algorithm>

namespace prw {

unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

EstimateResult mean_estimate(const RepMoments& m, std::uint64_t seed, std::string method) {
    EstimateResult r;
    r.estimate = m.mean_v();
    r.std_error = m.se_v();
    r.ci_lo = r.estimate - kZ95 * r.std_error;
    r.ci_hi = r.estimate + kZ95 * r.std_error;
    r.reps = m.n;
    r.seed = seed;
    r.method = std::move(method);
    return r;
}

EstimateResult indicator_estimate(const RepMoments& m, std::uint64_t seed, std::string method) {
    const double n = static_cast<double>(m.n);
    const double p = m.sum_v / n;
    EstimateResult r;
    r.estimate = p;
    r.std_error = std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
    // Wilson score interval
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    r.ci_lo = std::max(0.0, center - half);
    r.ci_hi = std::min(1.0, center + half);
    r.reps = m.n;
    r.seed = seed;
    r.method = std::move(method);
    return r;
}

} // namespace prw
