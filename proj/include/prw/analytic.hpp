#pragma once

#include <optional>
#include <span>
#include <vector>

#include "prw/tilt.hpp"
#include "prw/walk_sim.hpp"

namespace prw {

// Closed-form law of the all-time maximum when the increments are
// negated-exponential(lambda) and independent of the i.i.d. perturbations:
//   P(M_inf <= x) = P(xi <= x) exp(-lambda R(x)),  R(x) = int_x^inf P(xi > y) dy.
double exact_max_cdf(double lambda, const DistributionSpec& xi, double x);

// Model-level wrapper; rejects any other increment family.
double exact_max_cdf(const WalkModel& model, double x);
inline double exact_max_tail(const WalkModel& model, double x) {
    return 1.0 - exact_max_cdf(model, x);
}

// Tail of max_n S_n for the unperturbed walk. Exact for exp_difference
// increments; otherwise the r exp(-theta* t) plateau approximation
// (flagged via *approximate).
double unperturbed_max_tail(const DistributionSpec& increment, double theta_star, double r,
                            double t, bool* approximate = nullptr);

// Weighted plateau fit of the prefactor c in P(M_inf > x) ~ c exp(-theta* x)
// from importance-sampling estimates on a level grid.
struct PlateauFit {
    double c = 0.0;
    double std_error = 0.0;
    std::size_t plateau_start = 0;           // first index inside the plateau
    std::vector<double> scaled;               // exp(theta* x_i) * estimate_i
    std::vector<double> scaled_se;
};

PlateauFit cl_constant(const LundbergSolution& sol, std::span<const double> xs,
                       std::span<const EstimateResult> estimates);

// Approximation d (1 - E exp(nu X))^-1 exp(-nu x) for perturbations with an
// exact exponential tail d exp(-nu x); requires E exp(nu X) < 1.
double exp_perturbation_asymptote(const WalkModel& model, const ExpTailFit& fit, double x);

// Heavy-tail approximation R(x) / |E X|; applicability is gated separately.
double heavy_tail_asymptote(const WalkModel& model, double x);

// Applicability probe for the heavy-tail regime: the perturbation hazard
// must decrease toward zero along a geometric grid and the increment must
// have a two-sided exponential moment.
struct HazardGate {
    bool hazard_decreasing = false;
    bool hazard_vanishing = false;
    bool increment_light = false;
    std::vector<double> probe_x;
    std::vector<double> probe_h;

    bool passed() const { return hazard_decreasing && hazard_vanishing && increment_light; }
};

HazardGate heavy_tail_gate(const WalkModel& model);

// Lower bound int P(max_n S_n > x - y) dF_xi(y), plus the asymptotic
// constant r E exp(theta* xi) of the liminf of exp(theta* x) P(M_inf > x).
struct LowerBoundResult {
    double integral = 0.0;
    double asymptotic_constant = 0.0;
    bool unperturbed_approximate = false;
};

LowerBoundResult lower_bound(const WalkModel& model, const LundbergSolution& sol, double r,
                             double x);

// Upper bound on limsup exp(theta x) P(M_inf > x):
//   E[xi e^(theta xi)] / psi'(theta*) + 1 + E e^(theta xi) / (1 - e^(psi(kappa))).
// For nonnegative perturbations the trailing group tightens to the
// Cramer-Lundberg constant r when it is supplied.
struct UpperBoundResult {
    double value = 0.0;
    std::optional<double> refined;
};

UpperBoundResult upper_bound_exp_moments(const WalkModel& model, const LundbergSolution& sol,
                                   double theta, std::optional<double> r = std::nullopt);

} // namespace prw
