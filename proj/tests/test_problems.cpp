#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fraclap/io.hpp"
#include "fraclap/problems.hpp"
#include "oracles.hpp"

using namespace fraclap;
using Catch::Approx;

TEST_CASE("benchmark definitions carry the published parameters") {
    const ProblemDefinition p1 = example1();
    CHECK(p1.alpha == 1.8);
    CHECK(p1.kappa == 0.25);
    CHECK(p1.domain_length == Approx(std::numbers::pi));
    CHECK(p1.default_points == 200);
    CHECK(p1.default_k == 2);
    CHECK(p1.default_t_end == 0.4);
    CHECK_FALSE(p1.forcing_xt);

    const ProblemDefinition p2 = example2();
    CHECK(p2.default_points == 500);
    CHECK(p2.default_k == 3);
    CHECK(p2.initial(std::numbers::pi / 8.0, 0.0) == Approx(1.0).epsilon(1e-14));
    CHECK_FALSE(p2.exact);
    // the published run matrix uses both ends of the alpha range
    CHECK(example2(1.1, 0.25).alpha == 1.1);
    CHECK(example2(1.9, 0.25).alpha == 1.9);

    const ProblemDefinition p3 = example3();
    CHECK(p3.alpha == 1.7);
    CHECK(p3.kappa == 2.0);
    CHECK(p3.default_points == 400);

    const ProblemDefinition p4 = example4();
    CHECK(p4.dimension == 2);
    CHECK(p4.alpha == 1.5);
    CHECK(p4.kappa == 10.0);
    CHECK(p4.default_points == 40);
    CHECK(p4.default_k == 7);
    CHECK(p4.default_t_end == 1.0);
    CHECK(p4.forcing_u_coeff == -10.0);

    CHECK_THROWS_AS(problem_by_name("example9"), std::domain_error);
}

TEST_CASE("initial data vanish at the boundary") {
    const ProblemDefinition p1 = example1();
    CHECK(p1.initial(0.0, 0.0) == 0.0);
    CHECK(std::abs(p1.initial(std::numbers::pi, 0.0)) < 1e-12);
    const ProblemDefinition p2 = example2();
    CHECK(p2.initial(0.0, 0.0) == 0.0);
    CHECK(std::abs(p2.initial(std::numbers::pi, 0.0)) < 1e-12);

    // boundary-adjacent mesh values stay small for every example
    for (const char* name : {"example1", "example2", "example3", "example4"}) {
        const DiscretizedProblem dp(problem_by_name(name), 16);
        const auto u0 = dp.initial_vector();
        for (double v : u0) CHECK(std::isfinite(v));
    }
}

TEST_CASE("example 1 mesh binding") {
    const DiscretizedProblem dp(example1(), 200);
    CHECK(dp.laplacian().size() == 200);
    CHECK(dp.laplacian().mesh_width() == Approx(std::numbers::pi / 201.0).epsilon(1e-15));
    // forcing identically absent
    CHECK_FALSE(dp.has_forcing());
    CHECK_FALSE(dp.make_forcing());
}

TEST_CASE("example 3 forcing: zero at t = 0, finite on [0,2]") {
    const ProblemDefinition p3 = example3();
    for (double x : {0.1, 0.5, 0.9}) CHECK(p3.forcing_xt(x, 0.0, 0.0) == 0.0);

    const DiscretizedProblem dp(p3, 50);
    const auto f = dp.make_forcing();
    std::vector<double> u(dp.laplacian().size(), 0.0);
    for (double t : {0.0, 1e-8, 0.3, 1.0, 2.0}) {
        const auto fv = f(t, u);
        for (double v : fv) CHECK(std::isfinite(v));
    }
}

TEST_CASE("example 3 forcing matches an independent power-rule construction") {
    // Rebuild f from scratch: expand x^2(1-x)^2 into monomials and apply the
    // left/right fractional power rule D^a x^p = G(p+1)/G(p+1-a) x^(p-a)
    // term by term, then combine with the 1/(2cos(a pi/2)) Riesz factor.
    const double alpha = 1.7, kappa = 2.0;
    const ProblemDefinition p3 = example3(alpha, kappa);
    const double c2 = 1.0, c3 = -2.0, c4 = 1.0;  // x^2 - 2x^3 + x^4
    auto dleft = [&](double x) {
        return c2 * std::tgamma(3.0) / std::tgamma(3.0 - alpha) * std::pow(x, 2.0 - alpha) +
               c3 * std::tgamma(4.0) / std::tgamma(4.0 - alpha) * std::pow(x, 3.0 - alpha) +
               c4 * std::tgamma(5.0) / std::tgamma(5.0 - alpha) * std::pow(x, 4.0 - alpha);
    };
    for (double t : {0.2, 0.5, 1.5})
        for (double x : {0.04, 0.31, 0.5, 0.77, 0.98}) {
            const double riesz_bracket = dleft(x) + dleft(1.0 - x);
            const double f_ref =
                kappa * std::pow(t, alpha) / (2.0 * std::cos(alpha * std::numbers::pi / 2.0)) *
                    riesz_bracket +
                alpha * std::pow(t, alpha - 1.0) * x * x * (1.0 - x) * (1.0 - x);
            CHECK(p3.forcing_xt(x, 0.0, t) == Approx(f_ref).epsilon(1e-13));
        }
}

TEST_CASE("example 3: Riesz-form forcing differs from the sine-spectral operator by ~2%") {
    // The forcing is built from the Riesz (left+right power rule) form. For
    // x^2(1-x)^2, whose second derivative does not vanish at the boundary,
    // that form and the spectral Dirichlet power differ, so the mode-wise
    // residual of u_t + kappa (-Lap)^(alpha/2) u - f under the SPECTRAL power
    // settles near 2% of the forcing scale instead of vanishing. This pins
    // the measured mismatch; the transfer-path error against the closed-form
    // solution plateaus near 1e-3 for the same reason.
    const double alpha = 1.7, kappa = 2.0, t = 0.5;
    const ProblemDefinition p3 = example3(alpha, kappa);
    const std::size_t n = 100000;  // Simpson intervals
    const double h = 1.0 / double(n);
    std::vector<double> fx(n + 1), gx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = double(i) * h;
        gx[i] = x * x * (1.0 - x) * (1.0 - x);
        fx[i] = (i == 0 || i == n) ? 0.0 : p3.forcing_xt(x, 0.0, t);
    }
    auto simpson = [&](const std::vector<double>& vals, std::size_t s) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 2 <= n; i += 2) {
            const double x0 = double(i) * h;
            acc += h / 3.0 *
                   (vals[i] * std::sin(double(s) * std::numbers::pi * x0) +
                    4.0 * vals[i + 1] * std::sin(double(s) * std::numbers::pi * (x0 + h)) +
                    vals[i + 2] * std::sin(double(s) * std::numbers::pi * (x0 + 2 * h)));
        }
        return 2.0 * acc;
    };
    double fscale = 0.0;
    for (double v : fx) fscale = std::max(fscale, std::abs(v));
    for (std::size_t s : {1, 3, 5}) {
        const double b_s = simpson(gx, s);
        const double f_s = simpson(fx, s);
        const double mu_s = std::pow(double(s) * std::numbers::pi, alpha);
        const double residual =
            alpha * std::pow(t, alpha - 1.0) * b_s + kappa * std::pow(t, alpha) * mu_s * b_s - f_s;
        CHECK(std::abs(residual) > 1e-3 * fscale);   // the mismatch is real
        CHECK(std::abs(residual) < 6e-2 * fscale);   // and stays small
    }
    // even modes vanish by symmetry
    CHECK(std::abs(simpson(fx, 2)) < 1e-10 * fscale);
}

TEST_CASE("example 4 forcing residual vanishes on the four modes") {
    const double alpha = 1.5, kappa = 10.0;
    const ProblemDefinition p4 = example4(alpha, kappa);
    const std::size_t N = 63;
    const SineBasis basis(N);
    const double h = 1.0 / double(N + 1);

    struct Mode {
        int sx, sy;
        double coef, mu;
    };
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const std::vector<Mode> modes = {{1, 1, 9.0 / 16.0, 2.0 * pi2},
                                     {1, 3, -3.0 / 16.0, 10.0 * pi2},
                                     {3, 1, -3.0 / 16.0, 10.0 * pi2},
                                     {3, 3, 1.0 / 16.0, 18.0 * pi2}};

    for (double t : {0.25, 1.0}) {
        // sample f(x, y, t, u = exact) on the grid and transform
        std::vector<double> fgrid(N * N);
        for (std::size_t iy = 0; iy < N; ++iy)
            for (std::size_t ix = 0; ix < N; ++ix) {
                const double x = double(ix + 1) * h, y = double(iy + 1) * h;
                const double u = exact_solution_example4(x, y, t, alpha);
                fgrid[iy * N + ix] = p4.forcing_xt(x, y, t) + p4.forcing_u_coeff * u;
            }
        std::vector<double> fc(N * N);
        fraclap::detail::sine_transform_2d(basis, fgrid, fc);
        // sampled sin(sx pi x) sin(sy pi y) is exactly one orthonormal mode
        // scaled by (N+1)/2, so dividing by that recovers the trig amplitude
        for (const Mode& m : modes) {
            const double fhat = fc[std::size_t(m.sy - 1) * N + std::size_t(m.sx - 1)] * 2.0 /
                                double(N + 1);
            // u_t + kappa (-Lap)^(a/2) u = f per mode:
            const double residual = alpha * std::pow(t, alpha - 1.0) * m.coef +
                                    kappa * std::pow(t, alpha) * std::pow(m.mu, alpha / 2.0) * m.coef -
                                    fhat;
            CHECK(std::abs(residual) <= 1e-10 * std::max(1.0, std::abs(fhat)));
        }
    }
}

TEST_CASE("affine forcing jacobian is the constant diagonal") {
    const DiscretizedProblem dp(example4(), 8);
    CHECK(dp.forcing_depends_on_u());
    const auto jac = dp.make_forcing_jacobian();
    REQUIRE(jac);
    const std::vector<double> u(64, 0.3);
    for (double d : jac(0.5, u)) CHECK(d == -10.0);
}

TEST_CASE("forcing cache reevaluates when the stage time moves") {
    const DiscretizedProblem dp(example3(), 12);
    const auto f = dp.make_forcing();
    const std::vector<double> u(12, 0.0);
    const auto f1 = f(0.25, u);
    const auto f2 = f(0.5, u);
    const auto f1_again = f(0.25, u);
    CHECK(oracles::max_abs_diff(f1, f1_again) == 0.0);
    bool differs = false;
    for (std::size_t i = 0; i < f1.size(); ++i) differs |= f1[i] != f2[i];
    CHECK(differs);
}

TEST_CASE("exact vectors agree with the pointwise closed forms") {
    const DiscretizedProblem dp(example4(), 6);
    const auto ex = dp.exact_vector(0.7);
    for (std::size_t i = 0; i < ex.size(); ++i)
        CHECK(ex[i] ==
              Approx(exact_solution_example4(dp.xs()[i], dp.ys()[i], 0.7, 1.5)).margin(1e-15));
    const DiscretizedProblem dp2(example2(), 6);
    CHECK_FALSE(dp2.has_exact());
    CHECK_THROWS_AS(dp2.exact_vector(0.1), std::domain_error);
}

TEST_CASE("problem construction from a key = value configuration") {
    std::istringstream cfg(
        "# generic diffusion run\n"
        "dimension = 2\n"
        "N = 12\n"
        "alpha = 1.4\n"
        "kappa = 3.5\n"
        "t_end = 0.25\n"
        "k = 6\n");
    const auto kv = parse_config(cfg);
    const ProblemDefinition p = problem_from_config(kv);
    CHECK(p.dimension == 2);
    CHECK(p.alpha == 1.4);
    CHECK(p.kappa == 3.5);
    CHECK(p.default_points == 12);
    CHECK(p.default_k == 6);
    CHECK(p.default_t_end == 0.25);
    CHECK(p.initial(0.5, 0.5) == Approx(0.0625).epsilon(1e-14));
    CHECK(p.initial(0.0, 0.5) == 0.0);

    // invalid parameters are rejected
    std::istringstream bad("alpha = 2.5\n");
    CHECK_THROWS_AS(problem_from_config(parse_config(bad)), std::domain_error);
}

TEST_CASE("system builders wire the pieces together") {
    const DiscretizedProblem dp(example3(), 24);
    const DiscreteLaplacian& L = dp.laplacian();
    const RationalCoeffs rc = build_coeffs(3, dp.definition().beta(),
                                           tau_opt(L.lambda_min(), L.lambda_max()));
    const FactorizedPower fp = assemble_mk(rc, L);
    const auto sys = make_factorized_system(dp, fp);
    CHECK(sys.size() == 24);
    REQUIRE(sys.mass);
    CHECK_FALSE(sys.forcing_depends_on_u);
    CHECK(bool(sys.forcing));

    const auto sys_mt = make_transfer_system(dp);
    CHECK(sys_mt.size() == 24);
    CHECK_FALSE(sys_mt.mass);

    // k too large for the banded form is rejected by the system builder
    const RationalCoeffs rc_big = build_coeffs(30, dp.definition().beta(),
                                               tau_opt(L.lambda_min(), L.lambda_max()));
    const FactorizedPower fp_big = assemble_mk(rc_big, L);
    CHECK(fp_big.partial_fraction_only);
    CHECK_THROWS_AS(make_factorized_system(dp, fp_big), std::domain_error);
}

TEST_CASE("end-to-end: example 3 small mesh converges toward the exact solution") {
    const ProblemDefinition p3 = example3();
    const DiscretizedProblem dp(p3, 60);
    const DiscreteLaplacian& L = dp.laplacian();
    const RationalCoeffs rc = build_coeffs(6, p3.beta(), tau_opt(L.lambda_min(), L.lambda_max()));
    const auto sys = make_factorized_system(dp, assemble_mk(rc, L));
    StepperConfig cfg;
    const std::vector<double> snaps = {0.5};
    const Trajectory traj = integrate(sys, 0.5, cfg, snaps);
    const auto exact = dp.exact_vector(0.5);
    // coarse mesh: discretization-level agreement is all that is claimed
    CHECK(oracles::max_abs_diff(traj.states[0], exact) < 5e-3);
}
