#include "prw/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <vector>

#include "prw/analytic.hpp"
#include "prw/config.hpp"
#include "prw/integral_eq.hpp"
#include "prw/numerics.hpp"
#include "prw/simd_kernels.hpp"
#include "prw/tilt.hpp"
#include "prw/walk_sim.hpp"

namespace prw {

namespace {

constexpr const char* kVersion = "prw 0.1.0";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

struct SeedChoice {
    std::uint64_t value = 12345;
    std::string source = "default";
};

SeedChoice resolve_seed(bool flag_given, std::uint64_t flag_value) {
    SeedChoice s;
    if (flag_given) {
        s.value = flag_value;
        s.source = "flag";
        return s;
    }
    if (const char* env = std::getenv("PRW_SEED")) {
        s.value = std::strtoull(env, nullptr, 10);
        s.source = "env";
    }
    return s;
}

void write_manifest(std::ostream& out, int argc, const char* const* argv,
                    const SeedChoice& seed, const ModelConfig* cfg, unsigned workers) {
    out << "# tool=" << kVersion << "\n";
    out << "# cmd=";
    for (int i = 0; i < argc; ++i) {
        if (i > 0) out << ' ';
        out << argv[i];
    }
    out << "\n";
    out << "# seed=" << seed.value << " source=" << seed.source << "\n";
    if (cfg != nullptr) {
        std::string model = cfg->serialize();
        for (auto& c : model) {
            if (c == '\n') c = ';';
        }
        if (!model.empty() && model.back() == ';') model.pop_back();
        out << "# model=" << model << "\n";
        char hash[24];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(model.data(), model.size())));
        out << "# model_hash=" << hash << "\n";
    }
    out << "# workers=" << workers << "\n";
    out << "# simd=" << simd::isa_name(simd::active_isa()) << "\n";
}

void write_estimate_row(std::ostream& out, double x, const EstimateResult& est) {
    out << fmt(x) << ',' << fmt(est.estimate) << ',' << fmt(est.std_error) << ','
        << fmt(est.ci_lo) << ',' << fmt(est.ci_hi) << ',' << est.method << ',' << est.reps
        << ',' << est.seed << "\n";
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::config_error:
        case ErrorCode::invalid_parameter:
            return 1;
        default:
            return 2;
    }
}

struct CommonFlags {
    std::string model_path;
    std::vector<double> xs;
    std::uint64_t reps = 100000;
    std::uint64_t seed = 12345;
    unsigned workers = 0;
};

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    const auto t_start = std::chrono::steady_clock::now();

    CLI::App app{"tail probabilities of the all-time maximum of a perturbed random walk"};
    app.require_subcommand(1);

    CommonFlags f;
    double tol = 1e-6;
    double eps = 1e-5;
    std::size_t points = 4001;
    std::size_t max_terms = 100000;
    double xmin = 0.0, xmax = 0.0;
    std::string method = "is";
    std::string regime = "cl";
    std::string tilt_mode = "exact";
    std::string scenario_name;
    double theta_flag = 0.0;
    double lambda1 = 2.0;
    std::uint64_t horizon_flag = 0;
    std::size_t path_len = 5000;
    bool with_control = false;
    std::vector<CLI::Option*> seed_opts;

    auto add_common = [&](CLI::App* sub, bool needs_model) {
        if (needs_model) {
            sub->add_option("--model", f.model_path, "model config file")->required();
        }
        sub->add_option("--reps", f.reps, "Monte Carlo replications");
        seed_opts.push_back(
            sub->add_option("--seed", f.seed, "root seed (PRW_SEED env var as fallback)"));
        sub->add_option("--workers", f.workers, "worker threads (0 = all cores)");
    };

    CLI::App* c_exact = app.add_subcommand("exact", "closed-form maximum law");
    add_common(c_exact, true);
    c_exact->add_option("--x", f.xs, "levels")->required()->delimiter(',');

    CLI::App* c_theta = app.add_subcommand("theta", "Lundberg root, kappa and ladder constant");
    add_common(c_theta, true);

    CLI::App* c_est = app.add_subcommand("estimate", "Monte Carlo tail estimates");
    add_common(c_est, true);
    c_est->add_option("--x", f.xs, "levels")->required()->delimiter(',');
    c_est->add_option("--method", method, "crude|is|cond")
        ->check(CLI::IsMember({"crude", "is", "cond"}));
    c_est->add_option("--eps", eps, "conditional estimator truncation tolerance");
    c_est->add_option("--horizon", horizon_flag, "crude horizon override");
    c_est->add_option("--tilt", tilt_mode, "importance sampling tilt sampler")
        ->check(CLI::IsMember({"exact", "ar"}));

    CLI::App* c_ie = app.add_subcommand("solve-ie", "integral-equation solve of the maximum law");
    add_common(c_ie, true);
    CLI::Option* o_xmin = c_ie->add_option("--xmin", xmin, "grid lower end");
    CLI::Option* o_xmax = c_ie->add_option("--xmax", xmax, "grid upper end");
    c_ie->add_option("--points", points, "grid points");
    c_ie->add_option("--tol", tol, "series truncation tolerance");
    c_ie->add_option("--max-terms", max_terms, "series term cap");
    c_ie->add_option("--x", f.xs, "level of interest for the default grid")->delimiter(',');

    CLI::App* c_asy = app.add_subcommand("asymptote", "tail approximations");
    add_common(c_asy, true);
    c_asy->add_option("--regime", regime, "cl|exp|heavy")
        ->check(CLI::IsMember({"cl", "exp", "heavy"}));
    c_asy->add_option("--x", f.xs, "levels")->required()->delimiter(',');

    CLI::App* c_bounds = app.add_subcommand("bounds", "lower/upper bounds on the tail");
    add_common(c_bounds, true);
    c_bounds->add_option("--x", f.xs, "levels")->required()->delimiter(',');
    CLI::Option* o_theta = c_bounds->add_option("--theta", theta_flag, "upper-bound transform point");

    CLI::App* c_scen = app.add_subcommand("scenario", "canned production / counterexample runs");
    c_scen->add_option("name", scenario_name, "production|counterexample")
        ->required()
        ->check(CLI::IsMember({"production", "counterexample"}));
    c_scen->add_option("--model", f.model_path, "optional production model override");
    c_scen->add_option("--x", f.xs, "levels")->delimiter(',');
    c_scen->add_option("--reps", f.reps, "Monte Carlo replications");
    seed_opts.push_back(c_scen->add_option("--seed", f.seed, "root seed"));
    c_scen->add_option("--workers", f.workers, "worker threads");
    c_scen->add_option("--lambda1", lambda1, "counterexample rate");
    c_scen->add_option("--n", path_len, "production path length");
    c_scen->add_flag("--control", with_control, "also run the independent-marginals control");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    bool seed_from_flag = false;
    for (const CLI::Option* o : seed_opts) seed_from_flag = seed_from_flag || o->count() > 0;
    const SeedChoice seed = resolve_seed(seed_from_flag, f.seed);
    const unsigned workers = f.workers == 0 ? default_workers() : f.workers;

    int code = 0;
    try {
        ModelConfig cfg;
        const bool has_model = !f.model_path.empty();
        if (has_model) cfg = load_config_file(f.model_path);

        if (c_exact->parsed()) {
            const WalkModel model = cfg.build();
            write_manifest(out, argc, argv, seed, &cfg, workers);
            out << "# columns=x,cdf,tail\n";
            for (double x : f.xs) {
                const double cdf = exact_max_cdf(model, x);
                out << fmt(x) << ',' << fmt(cdf) << ',' << fmt(1.0 - cdf) << "\n";
            }
        } else if (c_theta->parsed()) {
            const WalkModel model = cfg.build();
            const LundbergSolution sol = solve_theta_star(model.increment());
            const EstimateResult r =
                estimate_r_ladder(model.increment(), sol, f.reps, seed.value, workers);
            write_manifest(out, argc, argv, seed, &cfg, workers);
            out << "# columns=theta_star,kappa,psi_prime,bracket_lo,bracket_hi,"
                   "r_estimate,r_std_error,reps,seed\n";
            out << fmt(sol.theta_star) << ',' << fmt(sol.kappa) << ','
                << fmt(sol.psi_prime_at_theta_star) << ',' << fmt(sol.bracket_lo) << ','
                << fmt(sol.bracket_hi) << ',' << fmt(r.estimate) << ',' << fmt(r.std_error)
                << ',' << r.reps << ',' << r.seed << "\n";
        } else if (c_est->parsed()) {
            const WalkModel model = cfg.build();
            write_manifest(out, argc, argv, seed, &cfg, workers);
            std::vector<std::string> warnings;
            std::vector<std::pair<double, EstimateResult>> rows;
            if (method == "crude") {
                for (double x : f.xs) {
                    const std::uint64_t horizon =
                        horizon_flag > 0 ? horizon_flag : crude_horizon(model, x);
                    rows.emplace_back(x, crude_tail(model, x, horizon, f.reps, seed.value,
                                                    workers));
                }
                out << "# note=finite-horizon estimate, biased low\n";
            } else if (method == "is") {
                const LundbergSolution sol = solve_theta_star(model.increment());
                const TiltSampling sampling = tilt_mode == "ar" ? TiltSampling::accept_reject
                                                                : TiltSampling::exact_family;
                for (double x : f.xs) {
                    rows.emplace_back(x, is_tail(model, sol, x, f.reps, seed.value, workers,
                                                 sampling, &warnings));
                }
            } else {
                for (double x : f.xs) {
                    rows.emplace_back(
                        x, conditional_tail(model, x, f.reps, eps, seed.value, workers));
                }
            }
            for (const auto& w : warnings) {
                out << "# warning=" << w << "\n";
                break; // one copy is enough
            }
            out << "# columns=x,estimate,std_error,ci_lo,ci_hi,method,reps,seed\n";
            for (const auto& [x, est] : rows) write_estimate_row(out, x, est);
        } else if (c_ie->parsed()) {
            const WalkModel model = cfg.build();
            Grid grid = [&]() {
                if (o_xmin->count() > 0 && o_xmax->count() > 0) {
                    return Grid(xmin, xmax, points);
                }
                const double x_interest = f.xs.empty() ? 10.0 : f.xs.back();
                LundbergSolution sol;
                const LundbergSolution* sol_ptr = nullptr;
                try {
                    sol = solve_theta_star(model.increment());
                    sol_ptr = &sol;
                } catch (const Error&) {
                }
                return default_grid(model, sol_ptr, x_interest, points);
            }();
            SolveStats stats;
            const TabulatedFn u = solve_u(model, grid, tol, max_terms, workers, &stats);
            const double res = residual(u, model, workers);
            write_manifest(out, argc, argv, seed, &cfg, workers);
            out << "# terms=" << stats.terms << " last_term_norm=" << fmt(stats.last_term_norm)
                << "\n";
            out << "# residual=" << fmt(res) << "\n";
            out << "# columns=x,u\n";
            for (std::size_t i = 0; i < grid.n_points; ++i) {
                out << fmt(grid.point(i)) << ',' << fmt(u.values[i]) << "\n";
            }
        } else if (c_asy->parsed()) {
            const WalkModel model = cfg.build();
            write_manifest(out, argc, argv, seed, &cfg, workers);
            if (regime == "cl") {
                const LundbergSolution sol = solve_theta_star(model.increment());
                std::vector<EstimateResult> ests;
                std::vector<std::string> warnings;
                for (double x : f.xs) {
                    ests.push_back(is_tail(model, sol, x, f.reps, seed.value, workers,
                                           TiltSampling::exact_family, &warnings));
                }
                const PlateauFit fit = cl_constant(sol, f.xs, ests);
                if (!warnings.empty()) out << "# warning=" << warnings.front() << "\n";
                out << "# applicability: theta_star=" << fmt(sol.theta_star)
                    << " plateau_start_index=" << fit.plateau_start << "\n";
                out << "# columns=x,scaled_estimate,scaled_se\n";
                for (std::size_t i = 0; i < f.xs.size(); ++i) {
                    out << fmt(f.xs[i]) << ',' << fmt(fit.scaled[i]) << ','
                        << fmt(fit.scaled_se[i]) << "\n";
                }
                out << "# columns=c,c_se,rate\n";
                out << fmt(fit.c) << ',' << fmt(fit.std_error) << ',' << fmt(sol.theta_star)
                    << "\n";
                out << "# note=c estimated from the plateau; existence only is guaranteed\n";
            } else if (regime == "exp") {
                const auto fit = model.perturbation().exp_tail_fit();
                if (!fit) {
                    throw Error(ErrorCode::inapplicable_model,
                                "perturbation has no exact exponential tail");
                }
                const double mg = model.increment().mgf(fit->rate);
                out << "# applicability: d=" << fmt(fit->prefactor) << " nu=" << fmt(fit->rate)
                    << " mgf_increment_at_nu=" << fmt(mg) << "\n";
                out << "# columns=x,value\n";
                for (double x : f.xs) {
                    out << fmt(x) << ',' << fmt(exp_perturbation_asymptote(model, *fit, x))
                        << "\n";
                }
            } else {
                const HazardGate gate = heavy_tail_gate(model);
                out << "# applicability: hazard_decreasing=" << gate.hazard_decreasing
                    << " hazard_vanishing=" << gate.hazard_vanishing
                    << " increment_light=" << gate.increment_light << "\n";
                if (!gate.probe_h.empty()) {
                    out << "# hazard_probe_first=" << fmt(gate.probe_h.front())
                        << " last=" << fmt(gate.probe_h.back()) << "\n";
                }
                if (!gate.passed()) {
                    throw Error(ErrorCode::condition_violated,
                                "heavy-tail applicability gate failed (see diagnostics)");
                }
                out << "# columns=x,value,out_of_range\n";
                for (double x : f.xs) {
                    const double v = heavy_tail_asymptote(model, x);
                    out << fmt(x) << ',' << fmt(v) << ',' << (v > 1.0 ? 1 : 0) << "\n";
                }
            }
        } else if (c_bounds->parsed()) {
            const WalkModel model = cfg.build();
            const LundbergSolution sol = solve_theta_star(model.increment());
            double r;
            std::string r_source;
            if (const auto exact = exact_cl_r(model.increment())) {
                r = *exact;
                r_source = "exact";
            } else {
                r = estimate_r_ladder(model.increment(), sol, f.reps, seed.value, workers)
                        .estimate;
                r_source = "ladder_estimate";
            }
            const double theta = o_theta->count() > 0 ? theta_flag : sol.theta_star;
            const UpperBoundResult ub = upper_bound_exp_moments(model, sol, theta, r);
            write_manifest(out, argc, argv, seed, &cfg, workers);
            out << "# applicability: theta_star=" << fmt(sol.theta_star) << " theta=" << fmt(theta)
                << " r=" << fmt(r) << " r_source=" << r_source << "\n";
            out << "# columns=x,lower_integral,lower_constant,upper,upper_refined\n";
            for (double x : f.xs) {
                const LowerBoundResult lb = lower_bound(model, sol, r, x);
                out << fmt(x) << ',' << fmt(lb.integral) << ',' << fmt(lb.asymptotic_constant)
                    << ',' << fmt(ub.value) << ','
                    << (ub.refined ? fmt(*ub.refined) : std::string("")) << "\n";
            }
        } else if (c_scen->parsed()) {
            if (scenario_name == "production") {
                const DistributionSpec interarrival =
                    cfg.interarrival.value_or(DistributionSpec::exponential(1.0));
                const DistributionSpec service =
                    cfg.service.value_or(DistributionSpec::exponential(1.25));
                const DistributionSpec delay =
                    cfg.delay.value_or(DistributionSpec::exponential(0.5));
                if (interarrival.family() != Family::exponential ||
                    service.family() != Family::exponential) {
                    throw Error(ErrorCode::inapplicable_model,
                                "production scenario expects exponential interarrival and "
                                "service laws");
                }
                // equivalent stationary model: increment = service time - gap
                const WalkModel model = WalkModel::independent(
                    DistributionSpec::exp_difference(service.param1(), interarrival.param1()),
                    delay);
                const LundbergSolution sol = solve_theta_star(model.increment());
                std::vector<double> xs = f.xs;
                if (xs.empty()) xs = {5.0, 10.0, 15.0, 20.0};

                write_manifest(out, argc, argv, seed, has_model ? &cfg : nullptr, workers);
                out << "# scenario=production interarrival=" << interarrival.to_string()
                    << " service=" << service.to_string() << " delay=" << delay.to_string()
                    << " path_length=" << path_len << "\n";
                out << "# columns=x,wn_exceed_freq,wn_se,m_inf_is,m_inf_is_se\n";

                // one pass: terminal total time per replication
                std::vector<double> w_final(f.reps);
                parallel_for(f.reps, workers, [&](std::size_t rep) {
                    RandomStream stream(seed.value, rep);
                    const LindleyPath p =
                        lindley_path(interarrival, service, delay, path_len, stream);
                    w_final[rep] = p.total_time.back();
                });
                for (double x : xs) {
                    RepMoments m;
                    for (double w : w_final) m.add(w > x ? 1.0 : 0.0, 0.0);
                    const EstimateResult freq = indicator_estimate(m, seed.value, "lindley");
                    const EstimateResult est = is_tail(model, sol, x, f.reps, seed.value,
                                                       workers);
                    out << fmt(x) << ',' << fmt(freq.estimate) << ',' << fmt(freq.std_error)
                        << ',' << fmt(est.estimate) << ',' << fmt(est.std_error) << "\n";
                }
            } else {
                std::vector<double> xs = f.xs;
                if (xs.empty()) xs = {1.5, 2.5, 3.5, 4.5};
                write_manifest(out, argc, argv, seed, nullptr, workers);
                out << "# scenario=counterexample lambda1=" << fmt(lambda1)
                    << " lambda2=" << fmt(lambda1 / 4.0)
                    << " theta_star=" << fmt(0.75 * lambda1) << "\n";
                const DecayFit fit = counterexample_decay(lambda1, xs, f.reps, seed.value,
                                                          workers);
                out << "# columns=mode,x,estimate,std_error\n";
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    out << "correlated," << fmt(xs[i]) << ','
                        << fmt(fit.estimates[i].estimate) << ','
                        << fmt(fit.estimates[i].std_error) << "\n";
                }
                out << "# columns=mode,fitted_rate,intercept\n";
                out << "correlated," << fmt(fit.rate) << ',' << fmt(fit.intercept) << "\n";
                if (with_control) {
                    const DecayFit ctl = counterexample_decay(
                        lambda1, xs, f.reps, seed.value, workers, Dependence::independent);
                    for (std::size_t i = 0; i < xs.size(); ++i) {
                        out << "independent," << fmt(xs[i]) << ','
                            << fmt(ctl.estimates[i].estimate) << ','
                            << fmt(ctl.estimates[i].std_error) << "\n";
                    }
                    out << "independent," << fmt(ctl.rate) << ',' << fmt(ctl.intercept) << "\n";
                }
            }
        }
    } catch (const ConfigParseError& e) {
        for (const auto& msg : e.errors) err << "config error: " << msg << "\n";
        code = 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        code = exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        code = 1;
    }

    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - t_start);
    err << "# elapsed_seconds=" << std::fixed << std::setprecision(3) << elapsed.count()
        << "\n";
    return code;
}

} // namespace prw
