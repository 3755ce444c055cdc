#pragma once

#include <cstdint>
#include <functional>

namespace prw {

// Adaptive Gauss-Kronrod integration of f over [a, b]; a and b may be
// +/-infinity. Relative tolerance ~1e-10 on well-behaved integrands.
double integrate(const std::function<double(double)>& f, double a, double b);

// Upper incomplete gamma function Gamma(a, x) = int_x^inf t^(a-1) e^-t dt.
double upper_incomplete_gamma(double a, double x);

// Root of a continuous monotone-crossing function on [lo, hi] by bisection;
// requires f(lo) and f(hi) of opposite sign. Converges to |hi-lo| <= x_tol.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double x_tol, int max_iter = 200);

// FNV-1a 64-bit hash, used for manifest model fingerprints.
std::uint64_t fnv1a64(const void* data, std::size_t n);

} // namespace prw
