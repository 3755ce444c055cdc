#include "prw/integral_eq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prw/numerics.hpp"
#include "prw/simd_kernels.hpp"

namespace prw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassCut = 1e-12; // density mass ignored beyond the mesh

// Smallest y with tail(y) <= cut (upper quantile), by monotone bisection.
double upper_quantile(const DistributionSpec& d, double cut) {
    if (d.support_max() < kInf) return d.support_max();
    double lo = 0.0;
    double hi = 1.0;
    while (d.tail(hi) > cut) {
        lo = hi;
        hi *= 2.0;
    }
    while (d.tail(lo) <= cut && lo > -1e300) lo = lo == 0.0 ? -1.0 : lo * 2.0;
    return bisect_root([&](double y) { return d.tail(y) - cut; }, lo, hi, 1e-9, 400);
}

double lower_quantile(const DistributionSpec& d, double cut) {
    if (d.support_min() > -kInf) return d.support_min();
    double hi = 0.0;
    double lo = -1.0;
    while (d.cdf(lo) > cut) {
        hi = lo;
        lo *= 2.0;
    }
    return bisect_root([&](double y) { return d.cdf(y) - cut; }, lo, hi, 1e-9, 400);
}

} // namespace

Grid::Grid(double x_min_, double x_max_, std::size_t n_points_)
    : x_min(x_min_), x_max(x_max_), n_points(n_points_) {
    if (!(x_min < x_max)) {
        throw Error(ErrorCode::invalid_parameter, "grid needs x_min < x_max");
    }
    if (n_points < 16) {
        throw Error(ErrorCode::invalid_parameter, "grid needs at least 16 points");
    }
}

double TabulatedFn::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

TabulatedFn apply_T(const TabulatedFn& g, const WalkModel& model, const Grid& grid,
                    unsigned workers) {
    if (model.dependence() != Dependence::independent) {
        throw Error(ErrorCode::unsupported_dependence,
                    "the operator kernel factorizes only for independent perturbations");
    }
    if (!(g.grid == grid)) {
        throw Error(ErrorCode::invalid_parameter, "g must be tabulated on the target grid");
    }
    const DistributionSpec& inc = model.increment();
    const DistributionSpec& xi = model.perturbation();
    const std::size_t n = grid.n_points;
    const double h = grid.step();

    TabulatedFn out{grid, std::vector<double>(n, 0.0), g.below_min_value, g.above_max_value};

    if (inc.family() == Family::deterministic) {
        // exact shift: (Tg)(x) = P(xi <= x) g(x - c)
        const double c = inc.param1();
        const double shift = c / h;
        parallel_for(n, workers, [&](std::size_t k) {
            const double pos = static_cast<double>(k) - shift;
            const double fl = std::floor(pos);
            const auto j = static_cast<std::ptrdiff_t>(fl);
            const double frac = pos - fl;
            const double gv = (1.0 - frac) * g.at_index(j) + frac * g.at_index(j + 1);
            out.values[k] = std::clamp(xi.cdf(grid.point(k)) * gv, 0.0, 1.0);
        });
        out.below_min_value = 0.0;             // P(xi <= x) -> 0
        out.above_max_value = g.above_max_value; // kernel mass 1 against g's upper extension
        return out;
    }

    // trapezoid weights of the increment density on a grid-aligned mesh,
    // clamped to the support so the rule never straddles a density jump
    const double y_lo = lower_quantile(inc, kMassCut);
    const double y_hi = upper_quantile(inc, kMassCut);
    auto m_lo = static_cast<std::ptrdiff_t>(std::floor(y_lo / h)) - 1;
    auto m_hi = static_cast<std::ptrdiff_t>(std::ceil(y_hi / h)) + 1;
    if (inc.support_min() > -kInf) {
        m_lo = std::max(m_lo, static_cast<std::ptrdiff_t>(std::ceil(inc.support_min() / h - 1e-9)));
    }
    if (inc.support_max() < kInf) {
        m_hi = std::min(m_hi, static_cast<std::ptrdiff_t>(std::floor(inc.support_max() / h + 1e-9)));
    }
    const std::size_t m_count = static_cast<std::size_t>(m_hi - m_lo + 1);

    // kernel reversed so each output point reads a contiguous window of g
    std::vector<double> kernel_rev(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        const double y = static_cast<double>(m_lo + static_cast<std::ptrdiff_t>(m)) * h;
        double w = inc.density(y) * h;
        if (m == 0 || m == m_count - 1) w *= 0.5;
        kernel_rev[m_count - 1 - m] = w;
    }

    // padded copy of g so windows never leave the buffer:
    // window for output k starts at padded index pad + k - m_lo - (m_count - 1)
    const std::size_t pad = m_count + static_cast<std::size_t>(m_lo < 0 ? -m_lo : m_lo) + 8;
    std::vector<double> padded(n + 2 * pad);
    std::fill(padded.begin(), padded.begin() + static_cast<std::ptrdiff_t>(pad),
              g.below_min_value);
    std::copy(g.values.begin(), g.values.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad));
    std::fill(padded.begin() + static_cast<std::ptrdiff_t>(pad + n), padded.end(),
              g.above_max_value);

    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(pad) - m_lo -
                                static_cast<std::ptrdiff_t>(m_count - 1);
    parallel_for(n, workers, [&](std::size_t k) {
        const double* window = padded.data() + base + static_cast<std::ptrdiff_t>(k);
        const double quad = simd::dot(kernel_rev.data(), window, m_count);
        out.values[k] = std::clamp(xi.cdf(grid.point(k)) * quad, 0.0, 1.0);
    });
    // extensions of the image are its true limits: the cdf factor vanishes on
    // the left, and the kernel has mass one against g's upper extension on the
    // right (inheriting g's lower extension would re-inject mass every pass)
    out.below_min_value = 0.0;
    out.above_max_value = g.above_max_value;
    return out;
}

TabulatedFn solve_u(const WalkModel& model, const Grid& grid, double tol,
                    std::size_t max_terms, unsigned workers, SolveStats* stats) {
    if (!(tol > 0.0)) {
        throw Error(ErrorCode::invalid_parameter, "tol must be positive");
    }

    const DistributionSpec& xi = model.perturbation();
    TabulatedFn term{grid, std::vector<double>(grid.n_points), 1.0, 0.0};
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        term.values[k] = xi.tail(grid.point(k));
    }
    TabulatedFn u = term;

    SolveStats local;
    bool converged = false;
    for (std::size_t it = 1; it <= max_terms; ++it) {
        term = apply_T(term, model, grid, workers);
        const double norm = term.sup_norm();
        local.terms = it;
        local.last_term_norm = norm;
        local.term_norms.push_back(norm);
        for (std::size_t k = 0; k < grid.n_points; ++k) {
            u.values[k] += term.values[k];
        }
        if (norm <= tol) {
            converged = true;
            break;
        }
    }
    if (stats != nullptr) *stats = local;
    if (!converged) {
        throw Error(ErrorCode::non_convergence,
                    "series did not converge within max_terms (last term norm " +
                        std::to_string(local.last_term_norm) + ")");
    }
    for (double& v : u.values) v = std::clamp(v, 0.0, 1.0);
    u.below_min_value = 1.0;
    u.above_max_value = 0.0;
    return u;
}

double residual(const TabulatedFn& u, const WalkModel& model, unsigned workers) {
    const Grid& grid = u.grid;
    const TabulatedFn tu = apply_T(u, model, grid, workers);
    const DistributionSpec& xi = model.perturbation();
    double sup = 0.0;
    for (std::size_t k = 1; k + 1 < grid.n_points; ++k) {
        const double b = xi.tail(grid.point(k));
        sup = std::max(sup, std::abs(u.values[k] - b - tu.values[k]));
    }
    return sup;
}

Grid default_grid(const WalkModel& model, const LundbergSolution* sol, double x_of_interest,
                  std::size_t n_points) {
    const DistributionSpec& xi = model.perturbation();
    const double mu = model.increment().mean();
    double s_min = xi.support_min();
    if (!(s_min > -kInf)) s_min = lower_quantile(xi, 1e-10);
    const double x_min = s_min - 5.0 / std::abs(mu);

    double x_max;
    if (sol != nullptr) {
        x_max = x_of_interest + 10.0 / sol->theta_star;
    } else {
        // heavy-tail regime: use the local decay scale of the integrated tail
        const double r = xi.integrated_tail(x_of_interest);
        const double t = xi.tail(x_of_interest);
        const double scale = t > 0.0 ? r / t : 1.0;
        x_max = x_of_interest + 10.0 * std::max(scale, 1.0);
    }
    if (!(x_max > x_min)) x_max = x_min + 1.0;
    return Grid(x_min, x_max, n_points);
}

} // namespace prw
