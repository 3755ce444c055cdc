#include "prw/tilt.hpp"

#include <cmath>
#include <limits>

#include "prw/numerics.hpp"

namespace prw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kLadderStepCap = 10'000'000;

bool above_root(const DistributionSpec& inc, double theta) {
    const double c = inc.cgf(theta);
    return !std::isfinite(c) || c > 0.0;
}

} // namespace

LundbergSolution solve_theta_star(const DistributionSpec& increment) {
    const double mu = increment.mean();
    if (!(mu < 0.0)) {
        throw Error(ErrorCode::invalid_drift,
                    "increment mean must be negative, got " + std::to_string(mu));
    }

    // The cgf is convex with cgf(0) = 0 and cgf'(0) = mu < 0, so a positive
    // root is unique when it exists. Expand hi until the cgf is positive or
    // diverges; if it stays negative out to a huge theta, no root exists.
    double eps = 1e-4;
    while (!std::isfinite(increment.cgf(eps))) {
        eps /= 16.0;
        if (eps < 1e-14) {
            throw Error(ErrorCode::no_root,
                        "mgf diverges for every positive theta (heavy-tailed increment)");
        }
    }

    double lo = 0.0;
    double hi = eps;
    while (!above_root(increment, hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) {
            throw Error(ErrorCode::no_root,
                        "cgf stays negative up to the mgf divergence boundary");
        }
    }
    const double bracket_lo = lo;
    const double bracket_hi = hi;

    // Bisect the boundary of {theta : cgf(theta) > 0 or mgf = inf}; that
    // boundary is the root whenever one exists.
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (above_root(increment, mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    const double theta_star = lo;
    const double res = increment.cgf(theta_star);
    if (!std::isfinite(res) || std::abs(res) > 1e-10) {
        throw Error(ErrorCode::no_root,
                    "cgf has no positive zero (residual " + std::to_string(res) + ")");
    }

    // kappa: zero of the (monotone) derivative of the convex cgf.
    const double d_lo = increment.cgf_prime(theta_star * 1e-9);
    const double d_hi = increment.cgf_prime(theta_star * (1.0 - 1e-9));
    if (!(d_lo < 0.0) || !(d_hi > 0.0)) {
        throw Error(ErrorCode::no_root, "cgf derivative does not change sign in (0, theta*)");
    }
    const double kappa = bisect_root(
        [&](double t) { return increment.cgf_prime(t); }, theta_star * 1e-9,
        theta_star * (1.0 - 1e-9), 1e-13);

    LundbergSolution sol;
    sol.theta_star = theta_star;
    sol.kappa = kappa;
    sol.psi_prime_at_theta_star = increment.cgf_prime(theta_star);
    sol.bracket_lo = bracket_lo;
    sol.bracket_hi = bracket_hi;
    if (!(sol.psi_prime_at_theta_star > 0.0)) {
        throw Error(ErrorCode::no_root, "tilted drift is not positive at theta*");
    }
    return sol;
}

TiltedIncrement::TiltedIncrement(DistributionSpec base, double theta, TiltSampling mode)
    : base_(std::move(base)), theta_(theta), mode_(mode) {
    if (!std::isfinite(base_.mgf(theta))) {
        throw Error(ErrorCode::divergent_moment, "mgf diverges at the tilt parameter");
    }

    switch (base_.family()) {
        case Family::exponential:
            exact_ = DistributionSpec::exponential(base_.param1() - theta);
            break;
        case Family::negated_exponential:
            exact_ = DistributionSpec::negated_exponential(base_.param1() + theta);
            break;
        case Family::exp_difference:
            if (theta == 0.0) {
                exact_ = base_;
            } else {
                exact_ = DistributionSpec::exp_difference(base_.param1() - theta,
                                                          base_.param2() + theta);
            }
            break;
        case Family::normal:
            exact_ = DistributionSpec::normal(
                base_.param1() + base_.param2() * base_.param2() * theta, base_.param2());
            break;
        case Family::deterministic:
            exact_ = base_;
            break;
        default:
            if (theta == 0.0) exact_ = base_;
            break;
    }

    if (mode_ == TiltSampling::exact_family && !exact_) {
        throw Error(ErrorCode::unsupported_family,
                    "no exact tilted sampler for this family; use accept_reject");
    }
    if (mode_ == TiltSampling::accept_reject) setup_accept_reject();
}

void TiltedIncrement::setup_accept_reject() {
    // Proposal: two-sided exponential around center_ whose tails are strictly
    // heavier than the tilted target's, so the likelihood ratio is maximized
    // at a point we can find in closed form.
    const double th = theta_;
    switch (base_.family()) {
        case Family::exp_difference: {
            const double rv = base_.param1() - th; // tilted right rate
            const double ru = base_.param2() + th; // tilted left rate
            if (!(rv > 0.0) || !(ru > 0.0)) {
                throw Error(ErrorCode::divergent_moment, "tilt outside the mgf domain");
            }
            center_ = 0.0;
            right_rate_ = 0.5 * rv;
            left_rate_ = 0.5 * ru;
            right_mass_ = 0.5;
            const double log_c =
                std::log(base_.param1() * base_.param2() / (base_.param1() + base_.param2()));
            // ratio maxima sit at the center on both half lines
            const double right0 = log_c - std::log(right_mass_ * right_rate_);
            const double left0 = log_c - std::log((1.0 - right_mass_) * left_rate_);
            log_envelope_ = std::max(right0, left0);
            break;
        }
        case Family::normal: {
            const double mu = base_.param1();
            const double sd = base_.param2();
            center_ = mu + sd * sd * th; // tilted mean
            right_rate_ = 1.0 / sd;
            left_rate_ = 1.0 / sd;
            right_mass_ = 0.5;
            auto log_target = [&](double x) {
                const double z = (x - mu) / sd;
                return th * x - 0.5 * z * z - std::log(sd) - 0.9189385332046727; // log sqrt(2pi)
            };
            auto log_proposal = [&](double x) {
                if (x >= center_) {
                    return std::log(right_mass_ * right_rate_) - right_rate_ * (x - center_);
                }
                return std::log((1.0 - right_mass_) * left_rate_) + left_rate_ * (x - center_);
            };
            // log target - log proposal is concave-quadratic per half line;
            // its maximum is at center_ +/- sd^2 * rate.
            const double xr = center_ + sd * sd * right_rate_;
            const double xl = center_ - sd * sd * left_rate_;
            log_envelope_ = std::max(log_target(xr) - log_proposal(xr),
                                     log_target(xl) - log_proposal(xl));
            break;
        }
        default:
            throw Error(ErrorCode::unsupported_family,
                        "no certified accept-reject envelope for this family");
    }
}

double TiltedIncrement::sample(RandomStream& stream) const {
    if (mode_ == TiltSampling::exact_family) {
        return exact_->sample(stream);
    }
    const double th = theta_;
    auto log_target = [&](double x) {
        return th * x + std::log(base_.density(x));
    };
    auto log_proposal = [&](double x) {
        if (x >= center_) {
            return std::log(right_mass_ * right_rate_) - right_rate_ * (x - center_);
        }
        return std::log((1.0 - right_mass_) * left_rate_) + left_rate_ * (x - center_);
    };
    for (int iter = 0; iter < 1'000'000; ++iter) {
        double x;
        if (stream.next_unit() < right_mass_) {
            x = center_ + stream.next_exponential(right_rate_);
        } else {
            x = center_ - stream.next_exponential(left_rate_);
        }
        const double log_ratio = log_target(x) - log_proposal(x) - log_envelope_;
        if (std::log(stream.next_unit()) < log_ratio) return x;
    }
    throw Error(ErrorCode::step_cap_exceeded, "accept-reject sampler failed to accept");
}

TiltedIncrement tilt(const DistributionSpec& increment, const LundbergSolution& sol,
                     TiltSampling mode) {
    const double res = increment.cgf(sol.theta_star);
    if (!std::isfinite(res) || std::abs(res) > 1e-8) {
        throw Error(ErrorCode::invalid_parameter,
                    "solution does not solve this increment's Lundberg equation");
    }
    return TiltedIncrement(increment, sol.theta_star, mode);
}

std::optional<double> exact_cl_r(const DistributionSpec& increment) {
    if (increment.family() == Family::exp_difference) {
        return increment.param2() / increment.param1();
    }
    return std::nullopt;
}

EstimateResult estimate_r_ladder(const DistributionSpec& increment,
                                 const LundbergSolution& sol, std::uint64_t reps,
                                 std::uint64_t seed, unsigned workers) {
    if (reps < 1) {
        throw Error(ErrorCode::invalid_parameter, "reps must be >= 1");
    }
    const TiltedIncrement tilted = tilt(increment, sol);
    const double theta = sol.theta_star;

    const RepMoments m = run_replications(
        reps, seed, workers, [&](std::uint64_t, RandomStream& stream) {
            double s = 0.0;
            for (std::uint64_t n = 0; n < kLadderStepCap; ++n) {
                s += tilted.sample(stream);
                if (s > 0.0) {
                    const double g = -std::expm1(-theta * s) / theta;
                    return std::pair<double, double>(g, s);
                }
            }
            throw Error(ErrorCode::step_cap_exceeded,
                        "ladder epoch exceeded the step cap; tilt looks misconfigured");
        });

    const double n = static_cast<double>(m.n);
    const double g_bar = m.sum_v / n;
    const double h_bar = m.sum_w / n;
    const double r = g_bar / h_bar;

    // delta-method variance of the ratio estimator
    const double s_gg = (m.sum_vv - n * g_bar * g_bar) / (n - 1.0);
    const double s_hh = (m.sum_ww - n * h_bar * h_bar) / (n - 1.0);
    const double s_gh = (m.sum_vw - n * g_bar * h_bar) / (n - 1.0);
    const double var_r =
        std::max(0.0, (s_gg - 2.0 * r * s_gh + r * r * s_hh) / (n * h_bar * h_bar));

    EstimateResult out;
    out.estimate = r;
    out.std_error = std::sqrt(var_r);
    out.ci_lo = r - kZ95 * out.std_error;
    out.ci_hi = r + kZ95 * out.std_error;
    out.reps = m.n;
    out.seed = seed;
    out.method = "r_ladder";
    return out;
}

} // namespace prw
