#pragma once

#include <cstddef>
#include <vector>

#include "prw/tilt.hpp"
#include "prw/walk_sim.hpp"

namespace prw {

// Uniform grid x_min + i h, i = 0..n_points-1.
struct Grid {
    double x_min;
    double x_max;
    std::size_t n_points;

    Grid(double x_min_, double x_max_, std::size_t n_points_);

    double step() const { return (x_max - x_min) / static_cast<double>(n_points - 1); }
    double point(std::size_t i) const { return x_min + static_cast<double>(i) * step(); }

    bool operator==(const Grid&) const = default;
};

// A function sampled on a grid, extended by constants outside it.
struct TabulatedFn {
    Grid grid;
    std::vector<double> values;
    double below_min_value = 1.0;
    double above_max_value = 0.0;

    double at_index(std::ptrdiff_t i) const {
        if (i < 0) return below_min_value;
        if (i >= static_cast<std::ptrdiff_t>(values.size())) return above_max_value;
        return values[static_cast<std::size_t>(i)];
    }

    double sup_norm() const;
};

// One application of the tail operator
//   (Tg)(x) = P(xi <= x) * int g(x - y) dF_increment(y),
// discretized by trapezoid quadrature of the increment density on a mesh
// aligned with the grid (deterministic increments shift exactly). Output is
// clamped to [0, 1]. Requires an independent perturbation and g on `grid`.
TabulatedFn apply_T(const TabulatedFn& g, const WalkModel& model, const Grid& grid,
                    unsigned workers = 0);

struct SolveStats {
    std::size_t terms = 0;         // series terms applied after b itself
    double last_term_norm = 0.0;
    std::vector<double> term_norms;
};

// Solves u = b + Tu for u(x) = P(M_inf > x) by summing the series
// b + Tb + T^2 b + ... until the newest term has sup norm <= tol.
// Partial sums increase monotonically; the result is clamped to [0, 1].
TabulatedFn solve_u(const WalkModel& model, const Grid& grid, double tol,
                    std::size_t max_terms, unsigned workers = 0, SolveStats* stats = nullptr);

// sup over interior grid points of |u - b - Tu|.
double residual(const TabulatedFn& u, const WalkModel& model, unsigned workers = 0);

// Domain rule: x_min = (xi lower quantile) - 5/|mu|; x_max = x_of_interest
// plus 10/theta* in the light-tailed regime or 10 integrated-tail scales
// otherwise.
Grid default_grid(const WalkModel& model, const LundbergSolution* sol, double x_of_interest,
                  std::size_t n_points);

} // namespace prw
