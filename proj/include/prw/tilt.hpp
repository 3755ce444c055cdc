#pragma once

#include <cstdint>
#include <optional>

#include "prw/distributions.hpp"
#include "prw/estimate.hpp"

namespace prw {

// Solution of the Lundberg equations for a negative-drift increment law:
// cgf(theta_star) = 0 with theta_star > 0, and kappa the stationary point
// of the (convex) cgf in (0, theta_star).
struct LundbergSolution {
    double theta_star = 0.0;
    double kappa = 0.0;
    double psi_prime_at_theta_star = 0.0; // tilted drift, > 0
    double bracket_lo = 0.0;              // expansion bracket around the root
    double bracket_hi = 0.0;
};

// Finds theta_star by geometric bracket expansion plus bisection (absolute
// tolerance 1e-12) and kappa as the root of cgf'. Throws invalid_drift when
// mean >= 0 and no_root when the cgf never returns to zero.
LundbergSolution solve_theta_star(const DistributionSpec& increment);

enum class TiltSampling {
    exact_family,  // analytic tilted law (rate shift / mean shift)
    accept_reject, // two-sided exponential proposal with a certified envelope
};

// The exponentially tilted law P*(dx) = exp(theta x) P(dx) / mgf(theta).
class TiltedIncrement {
public:
    TiltedIncrement(DistributionSpec base, double theta,
                    TiltSampling mode = TiltSampling::exact_family);

    double sample(RandomStream& stream) const;

    // Mean of the tilted law, cgf'(theta).
    double mean() const { return base_.cgf_prime(theta_); }

    const DistributionSpec& base() const { return base_; }
    double theta() const { return theta_; }
    TiltSampling sampling() const { return mode_; }

    // The tilted law as a member of the catalogue, when the family is
    // closed under tilting.
    std::optional<DistributionSpec> exact_family() const { return exact_; }

private:
    void setup_accept_reject();

    DistributionSpec base_;
    double theta_;
    TiltSampling mode_;
    std::optional<DistributionSpec> exact_;

    // accept-reject proposal: two-sided exponential anchored at center_,
    // right rate right_rate_ with probability right_mass_, left rate
    // left_rate_ otherwise; log_envelope_ bounds log target - log proposal.
    double center_ = 0.0;
    double right_rate_ = 0.0;
    double left_rate_ = 0.0;
    double right_mass_ = 0.0;
    double log_envelope_ = 0.0;
};

// Builds the tilted increment law at sol.theta_star.
TiltedIncrement tilt(const DistributionSpec& increment, const LundbergSolution& sol,
                     TiltSampling mode = TiltSampling::exact_family);

// Estimates the Cramer-Lundberg constant r of the unperturbed walk from
// simulated first strictly-ascending ladder heights H under the tilted law:
// r = E[(1 - exp(-theta* H)) / theta*] / E[H], with a delta-method
// standard error for the ratio.
EstimateResult estimate_r_ladder(const DistributionSpec& increment,
                                 const LundbergSolution& sol, std::uint64_t reps,
                                 std::uint64_t seed, unsigned workers = 0);

// Closed-form Cramer-Lundberg constant where one exists
// (exp_difference: neg_rate / pos_rate).
std::optional<double> exact_cl_r(const DistributionSpec& increment);

} // namespace prw
