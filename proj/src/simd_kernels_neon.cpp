// NEON kernel variants (baseline on aarch64).

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstddef>

#include "prw/simd_kernels.hpp"

namespace prw::simd::neon {

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    float64x2_t acc2 = vdupq_n_f64(0.0);
    float64x2_t acc3 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc2 = vfmaq_f64(acc2, vld1q_f64(a + i + 4), vld1q_f64(b + i + 4));
        acc3 = vfmaq_f64(acc3, vld1q_f64(a + i + 6), vld1q_f64(b + i + 6));
    }
    for (; i + 2 <= n; i += 2) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    acc0 = vaddq_f64(vaddq_f64(acc0, acc1), vaddq_f64(acc2, acc3));
    double acc = vgetq_lane_f64(acc0, 0) + vgetq_lane_f64(acc0, 1);
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const double* a, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
        acc1 = vaddq_f64(acc1, vld1q_f64(a + i + 2));
    }
    for (; i + 2 <= n; i += 2) {
        acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
    }
    acc0 = vaddq_f64(acc0, acc1);
    double acc = vgetq_lane_f64(acc0, 0) + vgetq_lane_f64(acc0, 1);
    for (; i < n; ++i) acc += a[i];
    return acc;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    float64x2_t best = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        best = vmaxq_f64(best, d);
    }
    double m = vgetq_lane_f64(best, 0);
    const double m1 = vgetq_lane_f64(best, 1);
    if (m1 > m) m = m1;
    for (; i < n; ++i) {
        const double d = std::fabs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

} // namespace prw::simd::neon

#endif // aarch64
