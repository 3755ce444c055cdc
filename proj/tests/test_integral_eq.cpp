#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "prw/analytic.hpp"
#include "prw/error.hpp"
#include "prw/integral_eq.hpp"

using prw::DistributionSpec;
using prw::Error;
using prw::Grid;
using prw::TabulatedFn;
using prw::WalkModel;

namespace {

WalkModel closed_form_model() {
    return WalkModel::independent(DistributionSpec::negated_exponential(1.0),
                                  DistributionSpec::exponential(1.0));
}

TabulatedFn constant_fn(const Grid& grid, double v) {
    return TabulatedFn{grid, std::vector<double>(grid.n_points, v), 1.0, 0.0};
}

TabulatedFn exact_tail_fn(const WalkModel& model, const Grid& grid) {
    TabulatedFn f = constant_fn(grid, 0.0);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        f.values[i] = prw::exact_max_tail(model, grid.point(i));
    }
    return f;
}

} // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS((void)Grid(1.0, 0.0, 100), Error);
    CHECK_THROWS_AS((void)Grid(0.0, 1.0, 8), Error);
    const Grid g(-5.0, 10.0, 4001);
    CHECK(g.step() == doctest::Approx(15.0 / 4000.0));
    CHECK(g.point(0) == -5.0);
    CHECK(g.point(4000) == doctest::Approx(10.0));
}

TEST_CASE("operator is linear at zero and vanishes below the perturbation support") {
    const WalkModel model = closed_form_model();
    const Grid grid(-5.0, 10.0, 2001);
    const TabulatedFn zero = constant_fn(grid, 0.0);
    const TabulatedFn t_zero = apply_T(zero, model, grid);
    for (double v : t_zero.values) CHECK(v == 0.0);

    TabulatedFn one = constant_fn(grid, 1.0);
    one.below_min_value = 1.0;
    one.above_max_value = 1.0; // keep g identically one beyond the grid
    const TabulatedFn t_one = apply_T(one, model, grid);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const double x = grid.point(i);
        if (x < 0.0) {
            CHECK(t_one.values[i] == 0.0); // P(xi <= x) = 0 kills the factor
        } else {
            // kernel mass is 1, so (T1)(x) = P(xi <= x)
            CHECK(t_one.values[i] ==
                  doctest::Approx(model.perturbation().cdf(x)).epsilon(1e-4));
        }
    }
    const std::size_t i1 = static_cast<std::size_t>((1.0 + 5.0) / grid.step() + 0.5);
    CHECK(t_one.values[i1] == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-4));
}

TEST_CASE("operator requires matching grids and independent perturbations") {
    const WalkModel model = closed_form_model();
    const Grid grid(-5.0, 10.0, 501);
    const Grid other(-5.0, 10.0, 601);
    CHECK_THROWS_AS((void)apply_T(constant_fn(other, 0.0), model, grid), Error);

    const WalkModel corr = WalkModel::correlated_example(2.0, 0.5);
    CHECK_THROWS_AS((void)apply_T(constant_fn(grid, 0.0), corr, grid), Error);
}

TEST_CASE("series solution matches the closed-form maximum law") {
    const WalkModel model = closed_form_model();
    const Grid grid(-5.0, 10.0, 4001);
    prw::SolveStats stats;
    const TabulatedFn u = solve_u(model, grid, 1e-6, 1000, 2, &stats);

    double sup = 0.0;
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        sup = std::max(sup, std::abs(u.values[i] - prw::exact_max_tail(model, grid.point(i))));
    }
    CHECK(sup <= 1e-3);
    CHECK(stats.terms >= 5);
    CHECK(stats.last_term_norm <= 1e-6);

    // exactly one below the perturbation support (b = 1 there)
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        if (grid.point(i) < 0.0) CHECK(u.values[i] == 1.0);
    }

    // nonincreasing values in [0, 1]
    for (std::size_t i = 0; i + 1 < grid.n_points; ++i) {
        CHECK(u.values[i] >= 0.0);
        CHECK(u.values[i] <= 1.0);
        CHECK(u.values[i + 1] <= u.values[i] + 1e-12);
    }

    CHECK(residual(u, model, 2) <= 1e-4);
}

TEST_CASE("series terms are nonnegative so partial sums increase") {
    const WalkModel model = closed_form_model();
    const Grid grid(-2.0, 8.0, 2001);
    TabulatedFn term = constant_fn(grid, 0.0);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        term.values[i] = model.perturbation().tail(grid.point(i));
    }
    std::vector<double> at_probe;
    const std::size_t probe = 1200;
    double partial = term.values[probe];
    at_probe.push_back(partial);
    for (int n = 0; n < 12; ++n) {
        term = apply_T(term, model, grid);
        for (double v : term.values) CHECK(v >= 0.0);
        partial += term.values[probe];
        at_probe.push_back(partial);
    }
    for (std::size_t i = 0; i + 1 < at_probe.size(); ++i) {
        CHECK(at_probe[i + 1] >= at_probe[i]);
    }
}

TEST_CASE("unperturbed tail via a degenerate perturbation") {
    const WalkModel model = WalkModel::independent(DistributionSpec::exp_difference(2.0, 1.0),
                                                   DistributionSpec::deterministic(0.0));
    const Grid grid(-5.0, 10.0, 4001);
    const TabulatedFn u = solve_u(model, grid, 1e-6, 2000, 2);
    const std::size_t i5 = static_cast<std::size_t>((5.0 + 5.0) / grid.step() + 0.5);
    CHECK(std::abs(u.values[i5] - 0.5 * std::exp(-5.0)) <= 2e-3);
}

TEST_CASE("deterministic increments use the exact shift") {
    const WalkModel model = WalkModel::independent(DistributionSpec::deterministic(-0.5),
                                                   DistributionSpec::exponential(1.0));
    const Grid grid(-6.0, 12.0, 3001);
    const TabulatedFn u = solve_u(model, grid, 1e-7, 5000, 2);
    for (double x : {1.0, 3.0}) {
        const auto est = conditional_tail(model, x, 40000, 1e-5, 77, 2);
        const std::size_t i = static_cast<std::size_t>((x - grid.x_min) / grid.step() + 0.5);
        CHECK(std::abs(u.values[i] - est.estimate) <= 4.0 * est.std_error + 1e-3);
    }
}

TEST_CASE("two-sided smooth increments work through the quadrature kernel") {
    const WalkModel model = WalkModel::independent(DistributionSpec::normal(-1.0, 0.5),
                                                   DistributionSpec::exponential(1.0));
    const Grid grid(-6.0, 12.0, 3001);
    const TabulatedFn u = solve_u(model, grid, 1e-7, 5000, 2);
    for (double x : {1.0, 4.0}) {
        const auto est = conditional_tail(model, x, 40000, 1e-5, 55, 2);
        const std::size_t i = static_cast<std::size_t>((x - grid.x_min) / grid.step() + 0.5);
        CHECK(std::abs(u.values[i] - est.estimate) <= 4.0 * est.std_error + 1e-3);
    }
}

TEST_CASE("residual flags a non-solution") {
    const WalkModel model = closed_form_model();
    const Grid grid(-5.0, 10.0, 1001);
    TabulatedFn zero = constant_fn(grid, 0.0);
    zero.below_min_value = 0.0;
    // sup_x |0 - b - 0| = sup b = 1 on this grid
    CHECK(residual(zero, model) == doctest::Approx(1.0));
}

TEST_CASE("residual of the exact solution is discretization-limited") {
    const WalkModel model = closed_form_model();
    const double res_fine = residual(exact_tail_fn(model, Grid(-5.0, 10.0, 4001)), model, 2);
    CHECK(res_fine <= 1e-4);

    // away from the upper boundary layer the defect is pure quadrature
    // error, so halving the step must shrink it at close to second order
    auto interior_defect = [&](const Grid& grid) {
        const TabulatedFn u = exact_tail_fn(model, grid);
        const TabulatedFn tu = apply_T(u, model, grid, 2);
        double sup = 0.0;
        for (std::size_t i = 0; i < grid.n_points; ++i) {
            const double x = grid.point(i);
            if (x > 2.0) break;
            const double b = model.perturbation().tail(x);
            sup = std::max(sup, std::abs(u.values[i] - b - tu.values[i]));
        }
        return sup;
    };
    const double d_coarse = interior_defect(Grid(-5.0, 10.0, 2001));
    const double d_fine = interior_defect(Grid(-5.0, 10.0, 4001));
    CHECK(d_fine <= 0.5 * d_coarse);
}

TEST_CASE("grid refinement changes shrink at first order or better") {
    const WalkModel model = closed_form_model();
    const Grid g1(-5.0, 10.0, 501);
    const Grid g2(-5.0, 10.0, 1001);
    const Grid g3(-5.0, 10.0, 2001);
    const TabulatedFn u1 = solve_u(model, g1, 1e-7, 2000, 2);
    const TabulatedFn u2 = solve_u(model, g2, 1e-7, 2000, 2);
    const TabulatedFn u3 = solve_u(model, g3, 1e-7, 2000, 2);

    double change12 = 0.0, change23 = 0.0;
    for (std::size_t i = 0; i < g1.n_points; ++i) {
        change12 = std::max(change12, std::abs(u1.values[i] - u2.values[2 * i]));
        change23 = std::max(change23, std::abs(u2.values[2 * i] - u3.values[4 * i]));
    }
    CHECK(change23 <= 4.0 * change12);
    CHECK(change23 <= change12 * 1.05);
}

TEST_CASE("series agrees with the conditional estimator at probe levels") {
    const WalkModel model = closed_form_model();
    const Grid grid(-5.0, 10.0, 4001);
    const TabulatedFn u = solve_u(model, grid, 1e-6, 1000, 2);
    for (double x : {0.5, 1.0, 2.0, 3.0, 4.0}) {
        const auto est = conditional_tail(model, x, 40000, 1e-5, 99, 2);
        const std::size_t i = static_cast<std::size_t>((x - grid.x_min) / grid.step() + 0.5);
        CHECK(std::abs(u.values[i] - est.estimate) <= 4.0 * est.std_error + 1e-3);
    }
}

TEST_CASE("non-convergence is reported") {
    const WalkModel model = closed_form_model();
    const Grid grid(-5.0, 10.0, 501);
    CHECK_THROWS_AS((void)solve_u(model, grid, 1e-12, 3, 1), Error);
}

TEST_CASE("default grid covers the perturbation support and the level of interest") {
    const WalkModel light = WalkModel::independent(DistributionSpec::exp_difference(2.0, 1.0),
                                                   DistributionSpec::exponential(3.0));
    const auto sol = prw::solve_theta_star(light.increment());
    const Grid g = default_grid(light, &sol, 8.0, 1001);
    CHECK(g.x_min < 0.0);
    CHECK(g.x_max >= 8.0 + 10.0 / sol.theta_star - 1e-9);

    const WalkModel heavy = WalkModel::independent(DistributionSpec::normal(-0.5, 0.5),
                                                   DistributionSpec::pareto(2.0, 1.0));
    const Grid gh = default_grid(heavy, nullptr, 40.0, 1001);
    CHECK(gh.x_min < 0.0);
    CHECK(gh.x_max > 40.0);
}
