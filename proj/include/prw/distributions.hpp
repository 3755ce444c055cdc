#pragma once

#include <optional>
#include <string>

#include "prw/error.hpp"
#include "prw/rng.hpp"

namespace prw {

enum class Family {
    exponential,         // rate lambda, support [0, inf)
    negated_exponential, // -E with E ~ exponential(lambda), support (-inf, 0]
    exp_difference,      // V - U, V ~ exp(pos_rate), U ~ exp(neg_rate)
    normal,              // mean, std
    pareto,              // shape, scale; survival (1 + x/scale)^-shape on x >= 0
    weibull,             // shape, scale; survival exp(-(x/scale)^shape) on x >= 0
    deterministic,       // point mass at value
};

// Exact exponential tail: tail(x) = prefactor * exp(-rate * x) for x >= threshold.
struct ExpTailFit {
    double prefactor;
    double rate;
    double threshold;
};

// A parametric one-dimensional law: sampling, tails, moments and transforms.
// Values are immutable and freely shareable across threads; all sampling
// state lives in the RandomStream argument.
class DistributionSpec {
public:
    static DistributionSpec exponential(double rate);
    static DistributionSpec negated_exponential(double rate);
    static DistributionSpec exp_difference(double pos_rate, double neg_rate);
    static DistributionSpec normal(double mean, double std);
    static DistributionSpec pareto(double shape, double scale);
    static DistributionSpec weibull(double shape, double scale);
    static DistributionSpec deterministic(double value);

    Family family() const noexcept { return family_; }
    double param1() const noexcept { return a_; }
    double param2() const noexcept { return b_; }

    double sample(RandomStream& stream) const;

    // P(X > x); exact closed form per family.
    double tail(double x) const;
    double cdf(double x) const { return 1.0 - tail(x); }

    bool has_density() const noexcept { return family_ != Family::deterministic; }
    double density(double x) const;

    // E exp(theta X); +infinity when the transform diverges.
    double mgf(double theta) const;
    // sup of the set where the mgf is finite (divergence boundary).
    double mgf_boundary() const;
    // log mgf; exactly 0 at theta = 0.
    double cgf(double theta) const;
    // d/dtheta cgf; closed form where available, central difference otherwise.
    double cgf_prime(double theta) const;
    // E[X exp(theta X)]; +infinity when divergent.
    double exp_moment(double theta) const;

    // density(x) / tail(x).
    double hazard(double x) const;

    // R(x) = int_x^inf tail(y) dy.
    double integrated_tail(double x) const;

    double mean() const;

    double support_min() const; // essential infimum
    double support_max() const; // essential supremum

    // Present for families whose upper tail is exactly d*exp(-nu*x).
    std::optional<ExpTailFit> exp_tail_fit() const;

    // Textual literal, e.g. "expdifference(2,1)"; parse_distribution inverts it.
    std::string to_string() const;

    bool operator==(const DistributionSpec&) const = default;

private:
    DistributionSpec(Family f, double a, double b) : family_(f), a_(a), b_(b) {}

    Family family_;
    double a_;
    double b_;
};

// Parses a case-insensitive literal of the form family(p1) or family(p1,p2).
DistributionSpec parse_distribution(const std::string& text);

} // namespace prw
