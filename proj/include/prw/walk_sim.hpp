#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prw/distributions.hpp"
#include "prw/estimate.hpp"
#include "prw/tilt.hpp"

namespace prw {

enum class Dependence { independent, correlated_example };

// A problem instance: increment law (mean < 0), perturbation law (finite
// positive-part mean) and the dependence mode between them. The correlated
// mode is the exponential construction X_i = R_i - Rt_i, xi_i = R_i with
// R ~ exp(lambda1), Rt ~ exp(lambda2), lambda2 < lambda1, under which the
// Cramer-Lundberg decay rate does not apply.
class WalkModel {
public:
    static WalkModel independent(DistributionSpec increment, DistributionSpec perturbation);
    static WalkModel correlated_example(double lambda1, double lambda2);

    const DistributionSpec& increment() const { return increment_; }
    const DistributionSpec& perturbation() const { return perturbation_; }
    Dependence dependence() const { return dependence_; }
    double lambda1() const { return lambda1_; }
    double lambda2() const { return lambda2_; }

private:
    WalkModel(DistributionSpec inc, DistributionSpec pert, Dependence dep, double l1, double l2);

    DistributionSpec increment_;
    DistributionSpec perturbation_;
    Dependence dependence_;
    double lambda1_ = 0.0;
    double lambda2_ = 0.0;
};

// One simulated path of the make-to-order production model, k = 0..n.
struct LindleyPath {
    std::vector<double> order_time;        // order placement times, nondecreasing
    std::vector<double> component_arrival; // order_time[k] + delay[k]
    std::vector<double> service;           // processing times
    std::vector<double> delay;             // supplier delays
    std::vector<double> waiting;           // time waiting at the facility
    std::vector<double> total_time;        // waiting[k] + delay[k]
};

// Simulates the waiting-time recursion of the production model: the system
// starts empty, order 0 is placed at time 0, and
//   waiting[k+1] = max(waiting[k] + component_arrival[k]
//                      - component_arrival[k+1] + service[k], 0).
LindleyPath lindley_path(const DistributionSpec& interarrival, const DistributionSpec& service,
                         const DistributionSpec& delay, std::size_t n, RandomStream& stream);

// Horizon rule for the finite-horizon estimator: max(50 x / |mu|, 1e4).
std::uint64_t crude_horizon(const WalkModel& model, double x);

// Indicator-mean estimate of P(M_horizon > x); a lower-biased estimate of
// P(M_inf > x) (flagged in the result). Binomial standard error and Wilson
// interval. Paths stop early once a certified bound on the remaining
// hitting probability drops below 1e-18.
EstimateResult crude_tail(const WalkModel& model, double x, std::uint64_t horizon,
                          std::uint64_t reps, std::uint64_t seed, unsigned workers = 0);

// First passage of the perturbed walk above x under the tilted increment
// law (perturbations keep their original law).
struct HittingRecord {
    std::uint64_t t = 0;      // hitting step index
    double walk_value = 0.0;  // S at the hitting step
    double overshoot = 0.0;   // S - x
    double weight = 0.0;      // exp(-theta* (S - x))
};

HittingRecord simulate_hitting(const WalkModel& model, const TiltedIncrement& tilted,
                               double theta_star, double x, RandomStream& stream);

// Unbiased importance-sampling estimate of P(M_inf > x) from the tilting
// identity: exp(theta* x) P(M_inf > x) = E*[exp(-theta* (S_T - x))].
// Requires an independent perturbation; warns (via *warnings) when the
// perturbation mgf diverges at theta*.
EstimateResult is_tail(const WalkModel& model, const LundbergSolution& sol, double x,
                       std::uint64_t reps, std::uint64_t seed, unsigned workers = 0,
                       TiltSampling sampling = TiltSampling::exact_family,
                       std::vector<std::string>* warnings = nullptr);

// Conditional Monte Carlo estimate of P(M_inf > x): averages
// 1 - exp(sum_j log(1 - tail_xi(x - S_j))) over unperturbed paths. The
// infinite sum is truncated once a certified bound on the expected
// remaining tail sum drops below eps; truncation can only lower the
// estimate, by at most eps.
EstimateResult conditional_tail(const WalkModel& model, double x, std::uint64_t reps,
                                double eps, std::uint64_t seed, unsigned workers = 0);

// Exponential decay-rate fit of P(M_inf > x) on a grid of levels, used for
// the correlated counterexample (lambda2 = lambda1 / 4); pass
// Dependence::independent to run the same-marginals control.
struct DecayFit {
    double rate = 0.0;      // fitted exponential decay rate (positive)
    double intercept = 0.0; // fitted log-prefactor
    std::vector<double> xs;
    std::vector<EstimateResult> estimates;
};

DecayFit counterexample_decay(double lambda1, std::span<const double> xs, std::uint64_t reps,
                              std::uint64_t seed, unsigned workers = 0,
                              Dependence mode = Dependence::correlated_example);

} // namespace prw
