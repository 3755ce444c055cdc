// Acceptance suite: runs every release criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "prw/analytic.hpp"
#include "prw/cli.hpp"
#include "prw/config.hpp"
#include "prw/integral_eq.hpp"
#include "prw/tilt.hpp"
#include "prw/walk_sim.hpp"

using namespace prw;

namespace {

unsigned workers() { return default_workers(); }

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

WalkModel closed_form_model() {
    return WalkModel::independent(DistributionSpec::negated_exponential(1.0),
                                  DistributionSpec::exponential(1.0));
}

// 1. closed-form oracle: crude and conditional estimators reproduce the
//    exact maximum law within 3 standard errors at five levels
Outcome criterion_closed_form_oracle() {
    Outcome o;
    const WalkModel model = closed_form_model();
    const std::vector<double> xs = {0.5, std::log(2.0), 1.0, 2.0, 3.0};
    const std::uint64_t reps = 100000;
    for (double x : xs) {
        const double truth = exact_max_tail(model, x);
        const EstimateResult crude =
            crude_tail(model, x, crude_horizon(model, x), reps, 101, workers());
        o.require(std::abs(crude.estimate - truth) <= 3.0 * crude.std_error,
                  "crude off at x=" + fmt(x) + " (" + fmt(crude.estimate) + " vs " +
                      fmt(truth) + ", se " + fmt(crude.std_error) + ")");
        const EstimateResult cond = conditional_tail(model, x, reps, 1e-5, 101, workers());
        o.require(std::abs(cond.estimate - truth) <= 3.0 * cond.std_error,
                  "conditional off at x=" + fmt(x) + " (" + fmt(cond.estimate) + " vs " +
                      fmt(truth) + ", se " + fmt(cond.std_error) + ")");
    }
    return o;
}

// 2. integral-equation fidelity against the closed form
Outcome criterion_integral_equation() {
    Outcome o;
    const WalkModel model = closed_form_model();
    const Grid grid(-5.0, 10.0, 4001);
    SolveStats stats;
    const TabulatedFn u = solve_u(model, grid, 1e-6, 10000, workers(), &stats);
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        sup = std::max(sup, std::abs(u.values[i] - exact_max_tail(model, grid.point(i))));
    }
    const double res = residual(u, model, workers());
    o.require(sup <= 1e-3, "sup-norm distance " + fmt(sup) + " > 1e-3");
    o.require(res <= 1e-4, "residual " + fmt(res) + " > 1e-4");
    o.detail = "sup=" + fmt(sup) + " residual=" + fmt(res) +
               " terms=" + std::to_string(stats.terms);
    return o;
}

// 3. Lundberg roots to 1e-10
Outcome criterion_lundberg_roots() {
    Outcome o;
    const LundbergSolution a = solve_theta_star(DistributionSpec::exp_difference(2.0, 1.0));
    o.require(std::abs(a.theta_star - 1.0) <= 1e-10,
              "exp_difference theta* = " + fmt(a.theta_star));
    const LundbergSolution b = solve_theta_star(DistributionSpec::normal(-1.0, 1.0));
    o.require(std::abs(b.theta_star - 2.0) <= 1e-10, "normal theta* = " + fmt(b.theta_star));
    o.require(std::abs(b.kappa - 1.0) <= 1e-10, "normal kappa = " + fmt(b.kappa));
    return o;
}

// 4. bare-maximum regime: importance sampling with a degenerate
//    perturbation and the ladder-height constant
Outcome criterion_bare_maximum() {
    Outcome o;
    const WalkModel model = WalkModel::independent(DistributionSpec::exp_difference(2.0, 1.0),
                                                   DistributionSpec::deterministic(0.0));
    const LundbergSolution sol = solve_theta_star(model.increment());
    const std::uint64_t reps = 100000;
    for (double x : {3.0, 5.0, 8.0}) {
        const EstimateResult est = is_tail(model, sol, x, reps, 404, workers());
        const double truth = 0.5 * std::exp(-x);
        o.require(std::abs(est.estimate - truth) <= 3.0 * est.std_error,
                  "is off at x=" + fmt(x) + " (" + fmt(est.estimate) + " vs " + fmt(truth) +
                      ")");
    }
    const EstimateResult r = estimate_r_ladder(model.increment(), sol, reps, 405, workers());
    o.require(std::abs(r.estimate - 0.5) <= 3.0 * r.std_error,
              "ladder constant " + fmt(r.estimate) + " (se " + fmt(r.std_error) + ")");
    return o;
}

// 5. light-tail plateau and the bound sandwich
Outcome criterion_plateau_sandwich() {
    Outcome o;
    const WalkModel model = WalkModel::independent(DistributionSpec::exp_difference(2.0, 1.0),
                                                   DistributionSpec::exponential(3.0));
    const LundbergSolution sol = solve_theta_star(model.increment());
    const std::vector<double> xs = {6.0, 8.0, 10.0, 12.0};
    const std::uint64_t reps = 200000;

    std::vector<EstimateResult> ests;
    std::vector<double> scaled, scaled_se;
    for (double x : xs) {
        ests.push_back(is_tail(model, sol, x, reps, 505, workers()));
        const double s = std::exp(sol.theta_star * x);
        scaled.push_back(s * ests.back().estimate);
        scaled_se.push_back(s * ests.back().std_error);
    }
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double gap = std::abs(scaled[i + 1] - scaled[i]);
        const double pooled = std::hypot(scaled_se[i + 1], scaled_se[i]);
        o.require(gap < 3.0 * pooled, "plateau break between x=" + fmt(xs[i]) + " and " +
                                          fmt(xs[i + 1]) + " (gap " + fmt(gap) + ", pooled " +
                                          fmt(pooled) + ")");
    }

    const PlateauFit fit = cl_constant(sol, xs, ests);
    const double lower = lower_bound(model, sol, *exact_cl_r(model.increment()), xs[0])
                             .asymptotic_constant;
    const UpperBoundResult upper =
        upper_bound_exp_moments(model, sol, sol.theta_star, exact_cl_r(model.increment()));
    o.require(fit.c >= lower - 3.0 * fit.std_error,
              "c " + fmt(fit.c) + " below lower constant " + fmt(lower));
    o.require(fit.c <= upper.value + 3.0 * fit.std_error,
              "c " + fmt(fit.c) + " above upper bound " + fmt(upper.value));
    o.detail = "c=" + fmt(fit.c) + " in [" + fmt(lower) + ", " + fmt(upper.value) +
               "] (refined " + fmt(*upper.refined) + ")";
    return o;
}

// 6. exponential-like perturbation tail ratio at a deep level
Outcome criterion_exponential_tail_regime() {
    Outcome o;
    const WalkModel model = WalkModel::independent(DistributionSpec::normal(-1.0, 0.5),
                                                   DistributionSpec::exponential(1.0));
    const double x = 12.0;
    const EstimateResult est = conditional_tail(model, x, 100000, 1e-5, 606, workers());
    const double approx =
        exp_perturbation_asymptote(model, *model.perturbation().exp_tail_fit(), x);
    const double ratio = est.estimate / approx;
    o.require(ratio >= 0.9 && ratio <= 1.1, "ratio " + fmt(ratio) + " outside [0.9, 1.1]");
    o.detail = "ratio=" + fmt(ratio);
    return o;
}

// 7. vanishing-hazard heavy tail ratio
Outcome criterion_heavy_tail_regime() {
    Outcome o;
    const WalkModel model = WalkModel::independent(DistributionSpec::normal(-0.5, 0.5),
                                                   DistributionSpec::pareto(2.0, 1.0));
    o.require(heavy_tail_gate(model).passed(), "applicability gate failed");
    const double x = 40.0;
    const EstimateResult est = conditional_tail(model, x, 100000, 1e-3, 707, workers());
    const double approx = heavy_tail_asymptote(model, x);
    const double ratio = est.estimate / approx;
    o.require(ratio >= 0.85 && ratio <= 1.15, "ratio " + fmt(ratio) + " outside [0.85, 1.15]");
    o.detail = "ratio=" + fmt(ratio);
    return o;
}

// 8. correlated counterexample decays at half the nominal rate
Outcome criterion_counterexample() {
    Outcome o;
    const std::vector<double> xs = {1.5, 2.5, 3.5, 4.5};
    const std::uint64_t reps = 200000;
    const DecayFit corr = counterexample_decay(2.0, xs, reps, 808, workers());
    o.require(std::abs(corr.rate - 1.0) <= 0.15,
              "correlated rate " + fmt(corr.rate) + " not within 1.0 +- 0.15");
    const DecayFit ctl =
        counterexample_decay(2.0, xs, reps, 808, workers(), Dependence::independent);
    o.require(std::abs(ctl.rate - 1.5) <= 0.15,
              "independent control rate " + fmt(ctl.rate) + " not within 1.5 +- 0.15");
    o.detail = "correlated=" + fmt(corr.rate) + " control=" + fmt(ctl.rate);
    return o;
}

// 9. property suite
Outcome criterion_properties() {
    Outcome o;

    // (a) waiting-time recursion equals its max representation, exactly
    {
        const auto interarrival = DistributionSpec::exponential(1.0);
        const auto service = DistributionSpec::exponential(1.25);
        const auto delay = DistributionSpec::exponential(0.5);
        const std::size_t n = 150;
        bool all_exact = true;
        for (std::uint64_t rep = 0; rep < 1000 && all_exact; ++rep) {
            RandomStream s(901, rep);
            const LindleyPath p = lindley_path(interarrival, service, delay, n, s);
            double best = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                double sum = 0.0;
                for (std::size_t j = k; j < n; ++j) {
                    sum += (p.component_arrival[j] - p.component_arrival[j + 1]) +
                           p.service[j];
                }
                best = std::max(best, sum);
            }
            all_exact = all_exact && (p.waiting[n] == best);
        }
        o.require(all_exact, "recursion vs max representation not exact");
    }

    // (b) estimator agreement on a common model
    const WalkModel light = WalkModel::independent(DistributionSpec::exp_difference(2.0, 1.0),
                                                   DistributionSpec::exponential(3.0));
    const LundbergSolution sol = solve_theta_star(light.increment());
    {
        const std::uint64_t reps = 100000;
        const double x = 2.0;
        const EstimateResult a = crude_tail(light, x, crude_horizon(light, x), reps, 902,
                                            workers());
        const EstimateResult b = is_tail(light, sol, x, reps, 902, workers());
        const EstimateResult c = conditional_tail(light, x, reps, 1e-5, 902, workers());
        o.require(a.ci_overlaps(b) && a.ci_overlaps(c) && b.ci_overlaps(c),
                  "estimator confidence intervals do not overlap");
    }

    // (c) monotonicity in the level
    {
        std::vector<EstimateResult> seq;
        for (double x : {1.0, 2.0, 3.0}) {
            seq.push_back(conditional_tail(light, x, 50000, 1e-5, 903, workers()));
        }
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
            o.require(seq[i].estimate + 4.0 * seq[i].std_error >=
                          seq[i + 1].estimate - 4.0 * seq[i + 1].std_error,
                      "estimates increase with the level");
        }
    }

    // (d) the maximum dominates a single perturbation
    {
        const WalkModel model = closed_form_model();
        for (double x : {1.0, 2.0}) {
            const EstimateResult est = conditional_tail(model, x, 50000, 1e-5, 904, workers());
            o.require(est.ci_hi >= model.perturbation().tail(x) - 4.0 * est.std_error,
                      "estimate fell below the single-perturbation tail");
        }
    }

    // (e) importance weights bounded by exp(theta* c0) for bounded
    //     perturbations
    {
        const double c0 = 0.7;
        const WalkModel model = WalkModel::independent(
            DistributionSpec::exp_difference(2.0, 1.0), DistributionSpec::deterministic(c0));
        const TiltedIncrement tilted = tilt(model.increment(), sol);
        const double cap = std::exp(sol.theta_star * c0) * (1.0 + 1e-12);
        bool bounded = true;
        for (std::uint64_t rep = 0; rep < 20000 && bounded; ++rep) {
            RandomStream s(905, rep);
            bounded = simulate_hitting(model, tilted, sol.theta_star, 3.0, s).weight <= cap;
        }
        o.require(bounded, "importance weight exceeded exp(theta* c0)");
    }

    // (f) conditioning does not increase variance
    {
        const WalkModel model = closed_form_model();
        const std::uint64_t reps = 100000;
        const EstimateResult crude =
            crude_tail(model, 1.0, crude_horizon(model, 1.0), reps, 906, workers());
        const EstimateResult cond = conditional_tail(model, 1.0, reps, 1e-5, 906, workers());
        o.require(cond.std_error <= crude.std_error, "conditioning increased the variance");
    }

    // (g) series terms are nonnegative, so partial sums increase
    {
        const WalkModel model = closed_form_model();
        const Grid grid(-3.0, 6.0, 1001);
        TabulatedFn term{grid, std::vector<double>(grid.n_points), 1.0, 0.0};
        for (std::size_t i = 0; i < grid.n_points; ++i) {
            term.values[i] = model.perturbation().tail(grid.point(i));
        }
        bool monotone = true;
        for (int it = 0; it < 10 && monotone; ++it) {
            term = apply_T(term, model, grid, workers());
            for (double v : term.values) monotone = monotone && v >= 0.0;
        }
        o.require(monotone, "a series term went negative");
    }

    // (h) the closed-form law is a valid cdf
    {
        const WalkModel model = closed_form_model();
        bool valid = true;
        double prev = -1.0;
        for (int i = 0; i <= 1000; ++i) {
            const double x = -5.0 + 25.0 * i / 1000.0;
            const double c = exact_max_cdf(model, x);
            valid = valid && c >= prev - 1e-14 && c >= 0.0 && c <= 1.0;
            prev = c;
        }
        valid = valid && exact_max_cdf(model, -10.0) == 0.0 &&
                std::abs(exact_max_cdf(model, 80.0) - 1.0) < 1e-12;
        o.require(valid, "closed form is not a valid cdf");
    }

    // (i) byte-identical command line output under a fixed seed
    {
        const std::string path =
            (std::filesystem::temp_directory_path() / "prw_acceptance_model.cfg").string();
        std::ofstream f(path);
        f << "increment=expdifference(2,1)\nperturbation=exponential(3)\n";
        f.close();
        const char* argv[] = {"prw",  "estimate", "--model", path.c_str(), "--x", "2,4",
                              "--method", "is",   "--reps",  "20000",      "--seed", "42"};
        std::ostringstream out1, err1, out2, err2;
        const int c1 = run_cli(12, argv, out1, err1);
        const int c2 = run_cli(12, argv, out2, err2);
        o.require(c1 == 0 && c2 == 0 && out1.str() == out2.str(),
                  "command line output is not reproducible");
    }

    return o;
}

struct Criterion {
    int id;
    const char* label;
    double time_limit_s;
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "closed-form oracle vs crude and conditional estimators", 60.0,
         criterion_closed_form_oracle},
        {2, "integral-equation fidelity", 120.0, criterion_integral_equation},
        {3, "Lundberg roots", 1.0, criterion_lundberg_roots},
        {4, "bare-maximum tail and ladder constant", 60.0, criterion_bare_maximum},
        {5, "light-tail plateau and bound sandwich", 300.0, criterion_plateau_sandwich},
        {6, "exponential-tail perturbation ratio", 300.0, criterion_exponential_tail_regime},
        {7, "heavy-tail perturbation ratio", 300.0, criterion_heavy_tail_regime},
        {8, "correlated counterexample decay rate", 300.0, criterion_counterexample},
        {9, "property suite", 300.0, criterion_properties},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (elapsed > c.time_limit_s) {
            o.pass = false;
            if (!o.detail.empty()) o.detail += "; ";
            o.detail += "over the " + fmt(c.time_limit_s) + " s budget";
        }
        if (!o.pass) ++failures;
        std::printf("%s criterion %d: %s%s%s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id,
                    c.label, o.detail.empty() ? "" : " -- ", o.detail.c_str(), elapsed);
        std::fflush(stdout);
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
    }
    return failures;
}
