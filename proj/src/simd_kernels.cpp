#include "prw/simd_kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace prw::simd {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

} // namespace scalar

namespace {

Isa detect_isa() {
    if (const char* env = std::getenv("PRW_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
#if defined(__x86_64__) || defined(_M_X64)
        if (std::strcmp(env, "avx2") == 0) return Isa::avx2;
#endif
#if defined(__aarch64__)
        if (std::strcmp(env, "neon") == 0) return Isa::neon;
#endif
    }
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return Isa::avx2;
    }
#endif
#if defined(__aarch64__)
    return Isa::neon;
#endif
    return Isa::scalar;
}

Isa g_isa = detect_isa();

} // namespace

Isa active_isa() { return g_isa; }

void force_isa(Isa isa) {
#if !(defined(__x86_64__) || defined(_M_X64))
    if (isa == Isa::avx2) isa = Isa::scalar;
#endif
#if !defined(__aarch64__)
    if (isa == Isa::neon) isa = Isa::scalar;
#endif
    g_isa = isa;
}

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "scalar";
}

double dot(const double* a, const double* b, std::size_t n) {
    switch (g_isa) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2: return avx2::dot(a, b, n);
#endif
#if defined(__aarch64__)
        case Isa::neon: return neon::dot(a, b, n);
#endif
        default: return scalar::dot(a, b, n);
    }
}

double sum(const double* a, std::size_t n) {
    switch (g_isa) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2: return avx2::sum(a, n);
#endif
#if defined(__aarch64__)
        case Isa::neon: return neon::sum(a, n);
#endif
        default: return scalar::sum(a, n);
    }
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    switch (g_isa) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2: return avx2::max_abs_diff(a, b, n);
#endif
#if defined(__aarch64__)
        case Isa::neon: return neon::max_abs_diff(a, b, n);
#endif
        default: return scalar::max_abs_diff(a, b, n);
    }
}

} // namespace prw::simd
