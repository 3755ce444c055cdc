#pragma once

#include <cstddef>

// Data-parallel kernels for the quadrature and reduction inner loops.
// Scalar reference implementations are always available; AVX2 (x86-64) and
// NEON (aarch64) variants are selected once at runtime. The environment
// variable PRW_SIMD=scalar|avx2|neon overrides detection.
//
// Vector variants reassociate the accumulation, so dot/sum agree with the
// scalar reference only up to rounding; max_abs_diff is exact.

namespace prw::simd {

enum class Isa { scalar, avx2, neon };

Isa active_isa();
void force_isa(Isa isa);
const char* isa_name(Isa isa);

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);
// sum_i a[i]
double sum(const double* a, std::size_t n);
// max_i |a[i] - b[i]|
double max_abs_diff(const double* a, const double* b, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
} // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
} // namespace neon
#endif

} // namespace prw::simd
