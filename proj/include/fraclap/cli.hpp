#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fraclap/io.hpp"
#include "fraclap/problems.hpp"

namespace fraclap::cli {

// Exit codes: 0 success, 2 usage error, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

struct RunReport {
    std::string config_echo;                       // re-runnable key=value list
    std::vector<double> times;                     // snapshot times
    std::vector<double> err_rational, err_mt;      // max-norm vs exact (when available)
    std::vector<double> diff_rational_mt;          // max-norm between the two paths
    double wall_rational = 0.0, wall_mt = 0.0;     // seconds, median over timing runs
    std::size_t k = 0;
    double epsilon = 0.0;                          // epsilon_k of the run's k

    void write(std::ostream& os) const {
        os << "config: " << config_echo << "\n";
        os << "k = " << k << "\n";
        os << "epsilon_k = " << format_g17(epsilon) << "\n";
        if (wall_rational > 0.0) os << "wall_rational_s = " << wall_rational << "\n";
        if (wall_mt > 0.0) os << "wall_mt_s = " << wall_mt << "\n";
        if (wall_rational > 0.0 && wall_mt > 0.0)
            os << "wall_ratio_mt_over_rational = " << wall_mt / wall_rational << "\n";
        if (!err_rational.empty())
            os << "final_error_rational = " << format_g17(err_rational.back()) << "\n";
        if (!err_mt.empty()) os << "final_error_mt = " << format_g17(err_mt.back()) << "\n";
        if (!diff_rational_mt.empty())
            os << "final_diff_rational_mt = " << format_g17(diff_rational_mt.back()) << "\n";
    }
};

// ---------------------------------------------------------------- convergence

struct ConvergenceOptions {
    int dimension = 1;
    std::size_t N = 200;           // per direction
    std::vector<double> alphas = {1.2, 1.5, 1.8};
    std::size_t k_max = 20;
};

// Rows (alpha, k, relative_error, theorem_bound, convergence_factor_power);
// errors and bound are relative to max lambda^beta over the spectrum.
inline void run_convergence(const ConvergenceOptions& o, std::ostream& csv) {
    const DiscreteLaplacian L =
        o.dimension == 1 ? laplacian_1d(o.N, 1.0) : laplacian_2d(o.N);
    const std::vector<double> eigs = L.eigenvalues();
    const double kappa_cond = L.condition_number();
    const double tau = tau_opt(L.lambda_min(), L.lambda_max());
    const double cf = convergence_factor(kappa_cond);

    csv << "# convergence dimension=" << o.dimension << " N=" << o.N << " k-max=" << o.k_max
        << " alpha=";
    for (std::size_t i = 0; i < o.alphas.size(); ++i) csv << (i ? "," : "") << o.alphas[i];
    csv << " (errors relative to max lambda^beta)\n";
    csv << "alpha,k,relative_error,theorem_bound,convergence_factor_power\n";
    for (double alpha : o.alphas) {
        const double beta = 0.5 * alpha;
        double denom = 0.0;
        for (double lam : eigs) denom = std::max(denom, std::pow(lam, beta));
        for (std::size_t k = 1; k <= o.k_max; ++k) {
            const RationalCoeffs rc = build_coeffs(k, beta, tau);
            const double err = spectral_error(rc, eigs) / denom;
            const double bound =
                error_bound(k, beta, kappa_cond, L.lambda_max(), tau) / denom;
            csv << format_g17(alpha) << "," << k << "," << format_g17(err) << ","
                << format_g17(bound) << "," << format_g17(std::pow(cf, double(k))) << "\n";
        }
    }
}

// ---------------------------------------------------------------------- bound

struct BoundOptions {
    int dimension = 1;
    std::size_t N = 200;
    double alpha = 1.5;
    std::size_t k_max = 20;
};

inline void run_bound(const BoundOptions& o, std::ostream& os) {
    const DiscreteLaplacian L =
        o.dimension == 1 ? laplacian_1d(o.N, 1.0) : laplacian_2d(o.N);
    const double beta = 0.5 * o.alpha;
    const double kap = L.condition_number();
    const double g = pole_gap_gamma(kap);
    const double rho = ellipse_radius(kap);
    const double cf = convergence_factor(kap);
    const double tau = tau_opt(L.lambda_min(), L.lambda_max());
    const std::vector<double> eigs = L.eigenvalues();
    double denom = 0.0;
    for (double lam : eigs) denom = std::max(denom, std::pow(lam, beta));

    os << "# bound table: dimension=" << o.dimension << " N=" << o.N << " alpha=" << o.alpha
       << " k-max=" << o.k_max << "\n";
    os << "kappa = " << format_g17(kap) << "\n";
    os << "gamma = " << format_g17(g) << "\n";
    os << "rho_M = " << format_g17(rho) << "\n";
    os << "convergence_factor = " << format_g17(cf) << "\n";
    os << "tau_opt = " << format_g17(tau) << "\n";

    // The squared pole-gap radius compared with the 1 + 2*pi/N shorthand; the
    // direct value is the defining expression, the shorthand is reported as-is.
    os << "\nrho_M^2 versus 1 + 2*pi/N (1-D Laplacian):\n";
    os << "N,direct_((kappa^1/4+1)/(kappa^1/4-1))^2,one_plus_2pi_over_N\n";
    std::vector<std::size_t> remark_Ns = {100, 200, 400};
    if (o.dimension == 1 &&
        std::find(remark_Ns.begin(), remark_Ns.end(), o.N) == remark_Ns.end())
        remark_Ns.push_back(o.N);
    for (std::size_t N : remark_Ns) {
        const DiscreteLaplacian L1 = laplacian_1d(N, 1.0);
        const double q = std::pow(L1.condition_number(), 0.25);
        const double direct = std::pow((q + 1.0) / (q - 1.0), 2.0);
        os << N << "," << format_g17(direct) << ","
           << format_g17(1.0 + 2.0 * std::numbers::pi / double(N)) << "\n";
    }

    os << "\nk,epsilon_k,bound_rel,measured_rel,factor\n";
    for (std::size_t k = 1; k <= o.k_max; ++k) {
        const RationalCoeffs rc = build_coeffs(k, beta, tau);
        const double eps = epsilon_k(rc, L.lambda_min());
        const double measured = spectral_error(rc, eigs) / denom;
        const double bound = error_bound(k, beta, kap, L.lambda_max(), tau) / denom;
        os << k << "," << format_g17(eps) << "," << format_g17(bound) << ","
           << format_g17(measured) << "," << format_g17(cf) << "\n";
    }

    os << "\nselect_k ladder (epsilon_k <= tol, k capped at " << o.k_max << "):\n";
    for (int e = 2; e <= 10; ++e) {
        const double tol = std::pow(10.0, -e);
        const SelectKResult sel = select_k(L, beta, tol, o.k_max);
        os << "tol=1e-" << (e < 10 ? "0" : "") << e << " -> k=" << sel.k
           << (sel.tol_reached ? "" : " (tolerance not reached)") << "\n";
    }
}

// ---------------------------------------------------------------------- solve

struct SolveOptions {
    int example = 1;
    std::optional<double> alpha, kappa, t_end, rel_tol;
    std::optional<std::size_t> N, k;
    std::string scheme = "theta";  // theta (1/2) or theta1 (implicit Euler)
    std::string mode = "both";     // rational | mt | both
    std::size_t snapshots = 25;
    int timing_runs = 3;
};

namespace detail {

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

template <class Fn>
double median_wall_seconds(int runs, Fn&& fn) {
    std::vector<double> w;
    for (int r = 0; r < std::max(1, runs); ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const auto stop = std::chrono::steady_clock::now();
        w.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::sort(w.begin(), w.end());
    return w[w.size() / 2];
}

}  // namespace detail

inline void run_solve(const SolveOptions& o, std::ostream& errors_csv, std::ostream* profile_csv,
                      std::ostream& report_os) {
    if (o.example < 1 || o.example > 4)
        throw std::domain_error("solve: example must be one of 1..4");
    if (o.mode != "rational" && o.mode != "mt" && o.mode != "both")
        throw std::domain_error("solve: mode must be rational, mt or both");
    double theta;
    if (o.scheme == "theta")
        theta = 0.5;
    else if (o.scheme == "theta1")
        theta = 1.0;
    else
        throw std::domain_error("solve: scheme must be theta or theta1");

    const ProblemDefinition base = problem_by_name(std::to_string(o.example));
    const ProblemDefinition def = problem_by_name(std::to_string(o.example),
                                                  o.alpha.value_or(base.alpha),
                                                  o.kappa.value_or(base.kappa));
    const std::size_t N = o.N.value_or(def.default_points);
    const std::size_t k = o.k.value_or(def.default_k);
    const double t_end = o.t_end.value_or(def.default_t_end);
    const double rel_tol = o.rel_tol.value_or(1e-6);

    const DiscretizedProblem dp(def, N);
    const DiscreteLaplacian& L = dp.laplacian();
    const double tau = tau_opt(L.lambda_min(), L.lambda_max());
    const RationalCoeffs rc = build_coeffs(k, def.beta(), tau);

    StepperConfig cfg;
    cfg.theta = theta;
    cfg.rel_tol = rel_tol;

    std::vector<double> snaps(o.snapshots);
    for (std::size_t i = 0; i < o.snapshots; ++i)
        snaps[i] = i + 1 == o.snapshots ? t_end : t_end * double(i + 1) / double(o.snapshots);

    RunReport rep;
    rep.k = k;
    rep.epsilon = epsilon_k(rc, L.lambda_min());
    {
        std::ostringstream echo;
        echo << "example=" << o.example << " N=" << N << " alpha=" << format_g17(def.alpha)
             << " kappa=" << format_g17(def.kappa) << " k=" << k << " t-end=" << format_g17(t_end)
             << " scheme=" << o.scheme << " rel-tol=" << format_g17(rel_tol) << " mode=" << o.mode
             << " snapshots=" << o.snapshots;
        rep.config_echo = echo.str();
    }
    rep.times = snaps;

    const bool want_rational = o.mode != "mt";
    const bool want_mt = o.mode != "rational";

    Trajectory traj_rational, traj_mt;
    if (want_rational) {
        const FactorizedPower fp = assemble_mk(rc, L);
        const auto sys = make_factorized_system(dp, fp);
        rep.wall_rational = detail::median_wall_seconds(
            o.timing_runs, [&] { traj_rational = integrate(sys, t_end, cfg, snaps); });
    }
    if (want_mt) {
        const auto sys = make_transfer_system(dp);
        rep.wall_mt = detail::median_wall_seconds(
            o.timing_runs, [&] { traj_mt = integrate(sys, t_end, cfg, snaps); });
    }

    for (std::size_t i = 0; i < snaps.size(); ++i) {
        if (dp.has_exact()) {
            const std::vector<double> ex = dp.exact_vector(snaps[i]);
            if (want_rational)
                rep.err_rational.push_back(detail::max_abs_diff(traj_rational.states[i], ex));
            if (want_mt) rep.err_mt.push_back(detail::max_abs_diff(traj_mt.states[i], ex));
        }
        if (want_rational && want_mt)
            rep.diff_rational_mt.push_back(
                detail::max_abs_diff(traj_rational.states[i], traj_mt.states[i]));
    }

    // error curves
    errors_csv << "# solve " << rep.config_echo << "\n";
    errors_csv << "t";
    if (!rep.err_rational.empty()) errors_csv << ",err_rational";
    if (!rep.err_mt.empty()) errors_csv << ",err_mt";
    if (!rep.diff_rational_mt.empty()) errors_csv << ",diff_rational_mt";
    errors_csv << "\n";
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        errors_csv << format_g17(snaps[i]);
        if (!rep.err_rational.empty()) errors_csv << "," << format_g17(rep.err_rational[i]);
        if (!rep.err_mt.empty()) errors_csv << "," << format_g17(rep.err_mt[i]);
        if (!rep.diff_rational_mt.empty())
            errors_csv << "," << format_g17(rep.diff_rational_mt[i]);
        errors_csv << "\n";
    }

    // final-state profiles
    if (profile_csv) {
        std::ostream& os = *profile_csv;
        os << "# solve " << rep.config_echo << "\n";
        os << "x";
        if (def.dimension == 2) os << ",y";
        if (dp.has_exact()) os << ",u_exact";
        if (want_rational) os << ",u_rational";
        if (want_mt) os << ",u_mt";
        os << "\n";
        const std::vector<double> ex = dp.has_exact() ? dp.exact_vector(t_end) : std::vector<double>{};
        for (std::size_t i = 0; i < L.size(); ++i) {
            os << format_g17(dp.xs()[i]);
            if (def.dimension == 2) os << "," << format_g17(dp.ys()[i]);
            if (!ex.empty()) os << "," << format_g17(ex[i]);
            if (want_rational) os << "," << format_g17(traj_rational.states.back()[i]);
            if (want_mt) os << "," << format_g17(traj_mt.states.back()[i]);
            os << "\n";
        }
    }

    rep.write(report_os);
}

// ------------------------------------------------------------------ cli_main

inline int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Banded rational approximation of fractional Laplacian powers: "
                 "convergence studies and reaction-diffusion benchmarks"};
    // key = value file with one [subcommand] section; flags take precedence
    app.set_config("--config", "", "configuration file ([convergence]/[solve]/[bound] section)");

    ConvergenceOptions conv;
    auto* c = app.add_subcommand("convergence",
                                 "Relative error of R_k versus k over the operator spectrum (CSV)");
    c->fallthrough();
    c->add_option("--dim", conv.dimension, "spatial dimension (1 or 2)")->check(CLI::IsMember({1, 2}));
    c->add_option("--N", conv.N, "interior points per direction");
    c->add_option("--alpha", conv.alphas, "fractional orders (repeatable)");
    c->add_option("--k-max", conv.k_max, "largest quadrature size");
    std::string conv_out;
    c->add_option("--out", conv_out, "output CSV path (default: stdout)");

    SolveOptions so;
    auto* s = app.add_subcommand("solve", "Run a benchmark problem with both solution paths");
    s->fallthrough();
    s->add_option("--example", so.example, "benchmark problem (1..4)")->check(CLI::Range(1, 4));
    double so_alpha = -1, so_kappa = -1, so_tend = -1, so_rtol = -1;
    long long so_N = -1, so_k = -1;
    s->add_option("--alpha", so_alpha, "fractional order override")->check(CLI::PositiveNumber);
    s->add_option("--kappa", so_kappa, "diffusivity override")->check(CLI::PositiveNumber);
    s->add_option("--N", so_N, "interior points per direction override")->check(CLI::PositiveNumber);
    s->add_option("--k", so_k, "quadrature size override")->check(CLI::PositiveNumber);
    s->add_option("--t-end", so_tend, "final time override")->check(CLI::PositiveNumber);
    s->add_option("--scheme", so.scheme, "time scheme: theta (trapezoidal) or theta1 (implicit Euler)")
        ->check(CLI::IsMember({"theta", "theta1"}));
    s->add_option("--rel-tol", so_rtol, "adaptive relative tolerance (default 1e-6)");
    s->add_option("--mode", so.mode, "rational | mt | both")
        ->check(CLI::IsMember({"rational", "mt", "both"}));
    s->add_option("--snapshots", so.snapshots, "number of snapshot times");
    s->add_option("--timing-runs", so.timing_runs, "runs per path for the median wall clock");
    std::string solve_out;
    s->add_option("--out", solve_out, "error-curve CSV path (profile CSV written alongside)");

    BoundOptions bo;
    auto* b = app.add_subcommand("bound", "Theorem bound, epsilon_k monitor and select_k table");
    b->fallthrough();
    b->add_option("--dim", bo.dimension, "spatial dimension (1 or 2)")->check(CLI::IsMember({1, 2}));
    b->add_option("--N", bo.N, "interior points per direction");
    b->add_option("--alpha", bo.alpha, "fractional order");
    b->add_option("--k-max", bo.k_max, "largest quadrature size");
    std::string bound_out;
    b->add_option("--out", bound_out, "output path (default: stdout)");

    app.require_subcommand(1);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    auto with_output = [&](const std::string& path, auto&& fn) {
        if (path.empty()) {
            fn(out);
        } else {
            std::ofstream f(path);
            if (!f) throw std::domain_error("cannot open output file: " + path);
            fn(f);
        }
    };

    try {
        if (c->parsed()) {
            with_output(conv_out, [&](std::ostream& os) { run_convergence(conv, os); });
        } else if (s->parsed()) {
            if (so_alpha > 0) so.alpha = so_alpha;
            if (so_kappa > 0) so.kappa = so_kappa;
            if (so_tend > 0) so.t_end = so_tend;
            if (so_rtol > 0) so.rel_tol = so_rtol;
            if (so_N > 0) so.N = std::size_t(so_N);
            if (so_k > 0) so.k = std::size_t(so_k);
            if (solve_out.empty()) {
                run_solve(so, out, nullptr, err);
            } else {
                std::ofstream fe(solve_out);
                if (!fe) throw std::domain_error("cannot open output file: " + solve_out);
                std::string prof = solve_out;
                const auto dot = prof.rfind('.');
                prof.insert(dot == std::string::npos ? prof.size() : dot, "_profile");
                std::ofstream fp(prof);
                if (!fp) throw std::domain_error("cannot open output file: " + prof);
                run_solve(so, fe, &fp, out);
            }
        } else if (b->parsed()) {
            with_output(bound_out, [&](std::ostream& os) { run_bound(bo, os); });
        }
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::domain_error& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace fraclap::cli
