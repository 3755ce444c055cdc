#include "prw/walk_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prw/numerics.hpp"

namespace prw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kStepCap = 10'000'000;

// Certified bound on the probability that a fresh negative-drift segment
// ever lifts the perturbed walk above a level t away from the current
// position: P <= amplitude * exp(-theta t). The union/Chernoff constants
// depend only on the model.
struct RemainderBound {
    bool available = false;
    double theta = 0.0;
    double log_amplitude = 0.0;

    // distance d with amplitude * exp(-theta d) <= p
    double distance_for(double p) const {
        return (log_amplitude - std::log(p)) / theta;
    }
};

RemainderBound hit_bound(const WalkModel& model) {
    RemainderBound best;
    const DistributionSpec& inc = model.increment();

    // probe a geometric theta grid; keep the exponent that stops soonest
    double best_distance = kInf;
    for (int k = 0; k <= 80; ++k) {
        const double theta = 16.0 * std::pow(2.0, -0.25 * k);
        const double rho = inc.mgf(theta);
        if (!std::isfinite(rho) || rho >= 1.0) continue;

        double log_jump;
        if (model.dependence() == Dependence::independent) {
            const double a = model.perturbation().mgf(theta);
            if (!std::isfinite(a)) continue;
            // P(exists j >= 1: S'_j + xi_j > t) <= mgf_xi rho / (1 - rho) e^{-theta t}
            log_jump = std::log(a) + std::log(rho) - std::log1p(-rho);
        } else {
            // future values are S'_{j-1} + (2R - Rt); E exp(theta(2R - Rt))
            const double half_l1 = 0.5 * model.lambda1();
            if (theta >= half_l1) continue;
            const double b = (half_l1 / (half_l1 - theta)) *
                             (model.lambda2() / (model.lambda2() + theta));
            log_jump = std::log(b) - std::log1p(-rho);
        }
        const double dist = (log_jump + std::log(1e18)) / theta;
        if (dist < best_distance) {
            best_distance = dist;
            best.available = true;
            best.theta = theta;
            best.log_amplitude = log_jump;
        }
    }
    return best;
}

} // namespace

WalkModel::WalkModel(DistributionSpec inc, DistributionSpec pert, Dependence dep, double l1,
                     double l2)
    : increment_(std::move(inc)), perturbation_(std::move(pert)), dependence_(dep),
      lambda1_(l1), lambda2_(l2) {
    double mu;
    try {
        mu = increment_.mean();
    } catch (const Error&) {
        throw Error(ErrorCode::invalid_drift, "increment mean must be finite and negative");
    }
    if (!(mu < 0.0)) {
        throw Error(ErrorCode::invalid_drift,
                    "increment mean must be negative, got " + std::to_string(mu));
    }
    // finite positive-part mean of the perturbation keeps M_inf finite
    if (perturbation_.family() == Family::pareto && perturbation_.param1() <= 1.0) {
        throw Error(ErrorCode::infinite_mean,
                    "perturbation must have a finite positive-part mean (pareto shape <= 1)");
    }
}

WalkModel WalkModel::independent(DistributionSpec increment, DistributionSpec perturbation) {
    return WalkModel(std::move(increment), std::move(perturbation), Dependence::independent,
                     0.0, 0.0);
}

WalkModel WalkModel::correlated_example(double lambda1, double lambda2) {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
        throw Error(ErrorCode::invalid_parameter, "correlated rates must be positive");
    }
    if (!(lambda2 < lambda1)) {
        throw Error(ErrorCode::invalid_drift,
                    "correlated mode needs lambda2 < lambda1 for negative drift");
    }
    return WalkModel(DistributionSpec::exp_difference(lambda1, lambda2),
                     DistributionSpec::exponential(lambda1), Dependence::correlated_example,
                     lambda1, lambda2);
}

LindleyPath lindley_path(const DistributionSpec& interarrival, const DistributionSpec& service,
                         const DistributionSpec& delay, std::size_t n, RandomStream& stream) {
    if (n < 1) {
        throw Error(ErrorCode::invalid_parameter, "path length must be >= 1");
    }
    LindleyPath p;
    const std::size_t count = n + 1;
    p.order_time.resize(count);
    p.component_arrival.resize(count);
    p.service.resize(count);
    p.delay.resize(count);
    p.waiting.resize(count);
    p.total_time.resize(count);

    p.order_time[0] = 0.0;
    p.delay[0] = delay.sample(stream);
    p.service[0] = service.sample(stream);
    p.component_arrival[0] = p.order_time[0] + p.delay[0];
    for (std::size_t k = 1; k < count; ++k) {
        p.order_time[k] = p.order_time[k - 1] + interarrival.sample(stream);
        p.delay[k] = delay.sample(stream);
        p.service[k] = service.sample(stream);
        p.component_arrival[k] = p.order_time[k] + p.delay[k];
    }

    p.waiting[0] = 0.0;
    for (std::size_t k = 0; k + 1 < count; ++k) {
        const double d = (p.component_arrival[k] - p.component_arrival[k + 1]) + p.service[k];
        p.waiting[k + 1] = std::max(p.waiting[k] + d, 0.0);
    }
    for (std::size_t k = 0; k < count; ++k) {
        p.total_time[k] = p.waiting[k] + p.delay[k];
    }
    return p;
}

std::uint64_t crude_horizon(const WalkModel& model, double x) {
    const double mu = model.increment().mean();
    const double by_drift = std::ceil(50.0 * std::max(0.0, x) / std::abs(mu));
    return static_cast<std::uint64_t>(std::max(by_drift, 1e4));
}

EstimateResult crude_tail(const WalkModel& model, double x, std::uint64_t horizon,
                          std::uint64_t reps, std::uint64_t seed, unsigned workers) {
    const double mu = model.increment().mean();
    if (x > 0.0 && static_cast<double>(horizon) < 50.0 * x / std::abs(mu)) {
        throw Error(ErrorCode::horizon_too_small,
                    "horizon must be at least 50 x / |mean increment|");
    }

    const RemainderBound bound = hit_bound(model);
    // distance beyond which the certified remaining-hit probability is
    // negligible next to the binomial standard error
    const double stop_distance =
        bound.available ? bound.distance_for(1e-18) : kInf;

    RepMoments m;
    if (model.dependence() == Dependence::independent) {
        const DistributionSpec inc = model.increment();
        const DistributionSpec xi = model.perturbation();
        m = run_replications(reps, seed, workers, [&](std::uint64_t, RandomStream& stream) {
            double s = 0.0;
            double hit = 0.0;
            for (std::uint64_t k = 0; k <= horizon; ++k) {
                if (k > 0) s += inc.sample(stream);
                if (s + xi.sample(stream) > x) {
                    hit = 1.0;
                    break;
                }
                if (x - s >= stop_distance) break;
            }
            return std::pair<double, double>(hit, 0.0);
        });
    } else {
        const double l1 = model.lambda1();
        const double l2 = model.lambda2();
        m = run_replications(reps, seed, workers, [&](std::uint64_t, RandomStream& stream) {
            double s = 0.0;
            double hit = 0.0;
            if (stream.next_exponential(l1) > x) { // xi_0 alone at step 0
                hit = 1.0;
            } else {
                for (std::uint64_t k = 1; k <= horizon; ++k) {
                    const double r = stream.next_exponential(l1);
                    const double rt = stream.next_exponential(l2);
                    if (s + 2.0 * r - rt > x) {
                        hit = 1.0;
                        break;
                    }
                    s += r - rt;
                    if (x - s >= stop_distance) break;
                }
            }
            return std::pair<double, double>(hit, 0.0);
        });
    }

    EstimateResult out = indicator_estimate(m, seed, "crude");
    out.lower_biased = true;
    return out;
}

HittingRecord simulate_hitting(const WalkModel& model, const TiltedIncrement& tilted,
                               double theta_star, double x, RandomStream& stream) {
    const DistributionSpec& xi = model.perturbation();
    double s = 0.0;
    for (std::uint64_t n = 0; n < kStepCap; ++n) {
        if (n > 0) s += tilted.sample(stream);
        if (s + xi.sample(stream) > x) {
            HittingRecord rec;
            rec.t = n;
            rec.walk_value = s;
            rec.overshoot = s - x;
            rec.weight = std::exp(-theta_star * (s - x));
            return rec;
        }
    }
    throw Error(ErrorCode::step_cap_exceeded,
                "hitting time not reached within the step cap; tilt looks misconfigured");
}

EstimateResult is_tail(const WalkModel& model, const LundbergSolution& sol, double x,
                       std::uint64_t reps, std::uint64_t seed, unsigned workers,
                       TiltSampling sampling, std::vector<std::string>* warnings) {
    if (model.dependence() != Dependence::independent) {
        throw Error(ErrorCode::unsupported_dependence,
                    "importance sampling requires an independent perturbation");
    }
    const double xi_boundary = model.perturbation().mgf_boundary();
    if (sol.theta_star >= xi_boundary - 1e-9 * std::max(1.0, std::abs(xi_boundary)) &&
        warnings != nullptr) {
        warnings->push_back(
            "perturbation mgf diverges at theta*; the Cramer-Lundberg regime does not "
            "apply and the estimator may have large variance");
    }

    const TiltedIncrement tilted = tilt(model.increment(), sol, sampling);
    const double theta = sol.theta_star;

    const RepMoments m =
        run_replications(reps, seed, workers, [&](std::uint64_t, RandomStream& stream) {
            const HittingRecord rec = simulate_hitting(model, tilted, theta, x, stream);
            // exp(-theta x) * weight, written to be exact when S_T = 0
            return std::pair<double, double>(std::exp(-theta * rec.walk_value), 0.0);
        });

    return mean_estimate(m, seed, "is");
}

EstimateResult conditional_tail(const WalkModel& model, double x, std::uint64_t reps,
                                double eps, std::uint64_t seed, unsigned workers) {
    if (model.dependence() != Dependence::independent) {
        throw Error(ErrorCode::unsupported_dependence,
                    "conditional estimator requires an independent perturbation");
    }
    if (!(eps > 0.0) || eps > 1e-3) {
        throw Error(ErrorCode::invalid_parameter, "eps must lie in (0, 1e-3]");
    }
    const DistributionSpec inc = model.increment();
    const DistributionSpec xi = model.perturbation();
    const double mu = inc.mean();

    // Truncation rule: stop at step n once
    //   R(x - S_n - margin) / |mu/2| <= eps/2   (drift envelope part)
    // with margin sized so the envelope-violation part is also <= eps/2:
    //   sum_j P(S'_j > margin + (mu/2) j) <= e^{-theta0 margin} rho'/(1-rho').
    // Together these certify E[remaining tail sum] <= eps.
    double theta0 = 0.0;
    double margin = kInf;
    for (int k = 0; k <= 80; ++k) {
        const double cand = 16.0 * std::pow(2.0, -0.25 * k);
        const double q = inc.cgf(cand) - cand * (mu / 2.0);
        if (!std::isfinite(q) || q >= 0.0) continue;
        const double rho = std::exp(q);
        const double m_cand = (std::log(rho / (1.0 - rho)) + std::log(2.0 / eps)) / cand;
        if (m_cand < margin) {
            margin = m_cand;
            theta0 = cand;
        }
    }
    if (!(theta0 > 0.0)) {
        throw Error(ErrorCode::truncation_unbounded,
                    "no usable exponential moment for the truncation certificate");
    }
    margin = std::max(margin, 0.0);

    double eps_tail; // threshold on R at the stopping point
    try {
        eps_tail = 0.5 * eps * std::abs(mu / 2.0);
        // invert R: largest t with R(t) <= eps_tail
        double lo = xi.support_min() > -kInf ? xi.support_min() : -1.0;
        double hi = std::max(1.0, lo + 1.0);
        while (xi.integrated_tail(hi) > eps_tail) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e15) {
                throw Error(ErrorCode::truncation_unbounded,
                            "integrated perturbation tail decays too slowly to certify");
            }
        }
        while (xi.integrated_tail(lo) <= eps_tail && lo > -1e15) lo -= std::max(1.0, -lo);
        const double t_star = bisect_root(
            [&](double t) { return xi.integrated_tail(t) - eps_tail; }, lo, hi, 1e-9, 300);
        const double s_stop = x - margin - t_star;

        const RepMoments m =
            run_replications(reps, seed, workers, [&](std::uint64_t, RandomStream& stream) {
                double s = 0.0;
                double log_prod = 0.0;
                for (std::uint64_t n = 0; n < kStepCap; ++n) {
                    const double p = xi.tail(x - s);
                    if (p >= 1.0) {
                        return std::pair<double, double>(1.0, 0.0); // certain hit
                    }
                    if (p > 1e-12) {
                        log_prod += std::log1p(-p);
                    } else {
                        log_prod -= p;
                    }
                    if (s <= s_stop) {
                        return std::pair<double, double>(-std::expm1(log_prod), 0.0);
                    }
                    s += inc.sample(stream);
                }
                throw Error(ErrorCode::step_cap_exceeded,
                            "conditional estimator did not reach its stopping set");
            });

        return mean_estimate(m, seed, "cond");
    } catch (const Error& e) {
        if (e.code() == ErrorCode::divergent_integral) {
            throw Error(ErrorCode::truncation_unbounded,
                        "perturbation has an infinite integrated tail");
        }
        throw;
    }
}

DecayFit counterexample_decay(double lambda1, std::span<const double> xs, std::uint64_t reps,
                              std::uint64_t seed, unsigned workers, Dependence mode) {
    if (xs.size() < 4) {
        throw Error(ErrorCode::invalid_parameter, "need at least 4 levels for the decay fit");
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) {
            throw Error(ErrorCode::invalid_parameter, "levels must be strictly increasing");
        }
    }
    const double lambda2 = lambda1 / 4.0;
    const WalkModel model =
        mode == Dependence::correlated_example
            ? WalkModel::correlated_example(lambda1, lambda2)
            : WalkModel::independent(DistributionSpec::exp_difference(lambda1, lambda2),
                                     DistributionSpec::exponential(lambda1));

    DecayFit fit;
    fit.xs.assign(xs.begin(), xs.end());
    for (double x : xs) {
        EstimateResult est = crude_tail(model, x, crude_horizon(model, x), reps, seed, workers);
        if (!(est.estimate > 0.0)) {
            throw Error(ErrorCode::degenerate_fit,
                        "estimate is zero at x = " + std::to_string(x) +
                            "; decay fit is degenerate");
        }
        fit.estimates.push_back(std::move(est));
    }

    // least squares on log-estimates
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double y = std::log(fit.estimates[i].estimate);
        sx += xs[i];
        sy += y;
        sxx += xs[i] * xs[i];
        sxy += xs[i] * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.rate = -slope;
    fit.intercept = (sy - slope * sx) / n;
    return fit;
}

} // namespace prw
