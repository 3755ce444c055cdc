#include "prw/analytic.hpp"

#include <algorithm>
#include <cmath>

#include "prw/numerics.hpp"

namespace prw {

double exact_max_cdf(double lambda, const DistributionSpec& xi, double x) {
    if (!(lambda > 0.0)) {
        throw Error(ErrorCode::invalid_parameter, "lambda must be positive");
    }
    return xi.cdf(x) * std::exp(-lambda * xi.integrated_tail(x));
}

double exact_max_cdf(const WalkModel& model, double x) {
    if (model.dependence() != Dependence::independent ||
        model.increment().family() != Family::negated_exponential) {
        throw Error(ErrorCode::inapplicable_model,
                    "the closed form requires independent negated-exponential increments");
    }
    return exact_max_cdf(model.increment().param1(), model.perturbation(), x);
}

double unperturbed_max_tail(const DistributionSpec& increment, double theta_star, double r,
                            double t, bool* approximate) {
    if (approximate != nullptr) *approximate = false;
    if (t <= 0.0) return 1.0;
    if (increment.family() == Family::exp_difference) {
        // memoryless ladder heights make the decay exact
        const double lv = increment.param1();
        const double lu = increment.param2();
        return (lu / lv) * std::exp(-(lv - lu) * t);
    }
    if (approximate != nullptr) *approximate = true;
    return std::min(1.0, r * std::exp(-theta_star * t));
}

PlateauFit cl_constant(const LundbergSolution& sol, std::span<const double> xs,
                       std::span<const EstimateResult> estimates) {
    if (xs.size() < 4 || xs.size() != estimates.size()) {
        throw Error(ErrorCode::invalid_parameter,
                    "need at least 4 levels with matching estimates");
    }
    PlateauFit fit;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto& est = estimates[i];
        if (!(est.estimate > 0.0) || est.std_error > 0.05 * est.estimate) {
            throw Error(ErrorCode::invalid_parameter,
                        "estimate at x = " + std::to_string(xs[i]) +
                            " has relative standard error above 5%");
        }
        const double scale = std::exp(sol.theta_star * xs[i]);
        fit.scaled.push_back(scale * est.estimate);
        fit.scaled_se.push_back(scale * est.std_error);
    }

    // largest suffix with consecutive agreement within 2 pooled SEs
    std::size_t start = xs.size() - 1;
    while (start > 0) {
        const double gap = std::abs(fit.scaled[start] - fit.scaled[start - 1]);
        const double pooled = std::hypot(fit.scaled_se[start], fit.scaled_se[start - 1]);
        if (gap >= 2.0 * pooled) break;
        --start;
    }
    if (start + 2 > xs.size()) {
        throw Error(ErrorCode::no_plateau,
                    "no plateau: even the last two scaled estimates disagree");
    }
    fit.plateau_start = start;

    double wsum = 0.0;
    double wv = 0.0;
    for (std::size_t i = start; i < xs.size(); ++i) {
        const double w = 1.0 / (fit.scaled_se[i] * fit.scaled_se[i]);
        wsum += w;
        wv += w * fit.scaled[i];
    }
    fit.c = wv / wsum;
    fit.std_error = std::sqrt(1.0 / wsum);
    return fit;
}

double exp_perturbation_asymptote(const WalkModel& model, const ExpTailFit& fit, double x) {
    const double m = model.increment().mgf(fit.rate);
    if (!(m < 1.0)) {
        throw Error(ErrorCode::condition_violated,
                    "requires E exp(nu X) < 1; got " + std::to_string(m));
    }
    return fit.prefactor / (1.0 - m) * std::exp(-fit.rate * x);
}

double heavy_tail_asymptote(const WalkModel& model, double x) {
    return model.perturbation().integrated_tail(x) / std::abs(model.increment().mean());
}

HazardGate heavy_tail_gate(const WalkModel& model) {
    HazardGate gate;
    const DistributionSpec& xi = model.perturbation();

    double scale = 1.0;
    switch (xi.family()) {
        case Family::pareto:
        case Family::weibull:
            scale = xi.param2();
            break;
        case Family::exponential:
            scale = 1.0 / xi.param1();
            break;
        case Family::normal:
            scale = xi.param2();
            break;
        default:
            break;
    }

    bool decreasing = true;
    bool ok = true;
    for (int i = 0; i <= 10; ++i) {
        const double x = scale * std::ldexp(1.0, i);
        double h;
        try {
            h = xi.hazard(x);
        } catch (const Error&) {
            ok = false;
            break;
        }
        if (!gate.probe_h.empty() && !(h < gate.probe_h.back())) decreasing = false;
        gate.probe_x.push_back(x);
        gate.probe_h.push_back(h);
    }
    gate.hazard_decreasing = ok && decreasing;
    gate.hazard_vanishing =
        ok && !gate.probe_h.empty() && gate.probe_h.back() < 0.1 * gate.probe_h.front();

    const double eps = 1e-3;
    gate.increment_light = std::isfinite(model.increment().mgf(eps)) &&
                           std::isfinite(model.increment().mgf(-eps));
    return gate;
}

// theta sits at or beyond the divergence boundary of the transform, up to
// the accuracy of the computed Lundberg root
bool at_mgf_boundary(const DistributionSpec& d, double theta) {
    const double b = d.mgf_boundary();
    return theta >= b - 1e-9 * std::max(1.0, std::abs(b));
}

LowerBoundResult lower_bound(const WalkModel& model, const LundbergSolution& sol, double r,
                             double x) {
    if (model.dependence() != Dependence::independent) {
        throw Error(ErrorCode::unsupported_dependence,
                    "the bound requires an independent perturbation");
    }
    const DistributionSpec& xi = model.perturbation();
    if (at_mgf_boundary(xi, sol.theta_star)) {
        throw Error(ErrorCode::divergent_moment,
                    "E exp(theta* xi) diverges; the asymptotic lower constant is undefined");
    }

    LowerBoundResult out;
    bool approx = false;

    if (xi.family() == Family::deterministic) {
        out.integral = unperturbed_max_tail(model.increment(), sol.theta_star, r,
                                            x - xi.param1(), &approx);
    } else {
        // int g(x - y) dF_xi(y); g has a kink where its argument crosses 0,
        // so integrate the two smooth pieces separately
        auto integrand = [&](double y) {
            const double f = xi.density(y);
            if (!(f > 0.0)) return 0.0;
            bool a = false;
            const double g = unperturbed_max_tail(model.increment(), sol.theta_star, r,
                                                  x - y, &a);
            approx = approx || a;
            return g * f;
        };
        const double lo = xi.support_min();
        const double hi = xi.support_max();
        if (x > lo && x < hi) {
            out.integral = integrate(integrand, lo, x) + integrate(integrand, x, hi);
        } else {
            out.integral = integrate(integrand, lo, hi);
        }
    }
    out.unperturbed_approximate = approx;
    out.asymptotic_constant = r * xi.mgf(sol.theta_star);
    return out;
}

UpperBoundResult upper_bound_exp_moments(const WalkModel& model, const LundbergSolution& sol,
                                   double theta, std::optional<double> r) {
    const DistributionSpec& xi = model.perturbation();
    if (at_mgf_boundary(xi, theta)) {
        throw Error(ErrorCode::divergent_moment,
                    "perturbation exponential moments diverge at theta");
    }
    const double em = xi.exp_moment(theta);
    const double mg = xi.mgf(theta);
    if (!std::isfinite(em) || !std::isfinite(mg)) {
        throw Error(ErrorCode::divergent_moment,
                    "perturbation exponential moments diverge at theta");
    }
    const double psi_kappa = model.increment().cgf(sol.kappa);
    UpperBoundResult out;
    out.value = em / sol.psi_prime_at_theta_star + 1.0 + mg / (-std::expm1(psi_kappa));

    const bool at_theta_star =
        std::abs(theta - sol.theta_star) <= 1e-12 * std::max(1.0, sol.theta_star);
    if (r.has_value() && xi.support_min() >= 0.0 && at_theta_star) {
        out.refined = em / sol.psi_prime_at_theta_star + *r;
    }
    return out;
}

} // namespace prw
