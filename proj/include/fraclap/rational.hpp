#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "fraclap/banded.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/laplacian.hpp"
#include "fraclap/quadrature.hpp"

namespace fraclap {

// Coefficients of the rational approximation
//   R_k(z) = z * sum_j gamma_j / (eta_j + z)  ~  z^beta,
// built from the k-point Gauss-Jacobi rule with weight (1-t)^(beta-1)(1+t)^(-beta):
//   gamma_j = (2 sin(beta pi) tau^beta / pi) w_j / (1 + theta_j),
//   eta_j   = tau (1 - theta_j) / (1 + theta_j).
struct RationalCoeffs {
    std::size_t k = 0;
    double beta = 0.0;
    double tau = 0.0;
    std::vector<double> gamma;  // positive
    std::vector<double> eta;    // positive, strictly decreasing for ascending nodes
};

// tau balancing the pole distances at both ends of the spectral interval.
inline double tau_opt(double lambda_min, double lambda_max) {
    if (!(lambda_min > 0.0) || !(lambda_max > 0.0) || lambda_min > lambda_max)
        throw std::domain_error("tau_opt: need 0 < lambda_min <= lambda_max");
    return std::sqrt(lambda_min * lambda_max);
}

// Pole location p_tau(lambda) = (tau + lambda)/(tau - lambda) of the transformed
// integrand; > 1 below tau, < -1 above. lambda = tau is rejected (the pole is
// at infinity there, the best possible case, which no caller evaluates).
inline double mobius_pole(double tau, double lambda) {
    if (!(tau > 0.0) || !(lambda > 0.0)) throw std::domain_error("mobius_pole: inputs must be positive");
    if (lambda == tau) throw std::domain_error("mobius_pole: lambda equals tau (pole at infinity)");
    return (tau + lambda) / (tau - lambda);
}

inline RationalCoeffs build_coeffs(std::size_t k, double beta, double tau) {
    if (!(tau > 0.0)) throw std::domain_error("build_coeffs: tau must be positive");
    const QuadratureRule rule = gauss_jacobi(JacobiWeight::fractional(beta), k);
    RationalCoeffs rc;
    rc.k = k;
    rc.beta = beta;
    rc.tau = tau;
    rc.gamma.resize(k);
    rc.eta.resize(k);
    const double front = 2.0 * std::sin(beta * std::numbers::pi) * std::pow(tau, beta) / std::numbers::pi;
    for (std::size_t j = 0; j < k; ++j) {
        const double th = rule.nodes[j];
        rc.gamma[j] = front * rule.weights[j] / (1.0 + th);
        rc.eta[j] = tau * (1.0 - th) / (1.0 + th);
    }
    return rc;
}

inline double eval_scalar(const RationalCoeffs& r, double lambda) {
    double s = 0.0;
    for (std::size_t j = 0; j < r.k; ++j) s += r.gamma[j] / (r.eta[j] + lambda);
    return lambda * s;
}

// Scalar condition-number gamma of the pole set, (sqrt(kappa)+1)/(sqrt(kappa)-1).
inline double pole_gap_gamma(double kappa) {
    if (!(kappa > 1.0)) throw std::domain_error("pole_gap_gamma: kappa must exceed 1");
    const double s = std::sqrt(kappa);
    return (s + 1.0) / (s - 1.0);
}

// Bernstein-ellipse radius rho_M = gamma + sqrt(gamma^2 - 1) = (kappa^(1/4)+1)/(kappa^(1/4)-1).
inline double ellipse_radius(double kappa) {
    const double g = pole_gap_gamma(kappa);
    return g + std::sqrt(g * g - 1.0);
}

// Asymptotic error reduction per quadrature point, ((kappa^(1/4)-1)/(kappa^(1/4)+1))^2 = 1/rho_M^2.
inline double convergence_factor(double kappa) {
    if (!(kappa >= 1.0)) throw std::domain_error("convergence_factor: kappa must be >= 1");
    if (kappa == 1.0) return 0.0;
    const double q = std::pow(kappa, 0.25);
    const double f = (q - 1.0) / (q + 1.0);
    return f * f;
}

// A-priori error bound on ||A^beta - R_k(A)||_2 with the explicit constant 16e
// traced through the proof chain; conservative by design. Returns 0 for
// kappa = 1, where the approximation is exact at the single spectral point.
inline double error_bound(std::size_t k, double beta, double kappa, double norm_A, double tau) {
    if (k == 0) throw std::domain_error("error_bound: k must be >= 1");
    if (!(kappa >= 1.0)) throw std::domain_error("error_bound: kappa must be >= 1");
    if (kappa == 1.0) return 0.0;
    const double g = pole_gap_gamma(kappa);
    const double rho = ellipse_radius(kappa);
    const double c = 16.0 * std::numbers::e;
    return c * norm_A * std::pow(tau, beta) * (rho + 1.0) / ((rho - 1.0) * (rho - g)) * double(k) /
           std::pow(rho, 2.0 * double(k));
}

// Decay-rate perturbation of the slowest mode: |R_k(lambda_min) - lambda_min^beta|.
inline double epsilon_k(const RationalCoeffs& r, double lambda_min) {
    if (!(lambda_min > 0.0)) throw std::domain_error("epsilon_k: lambda_min must be positive");
    return std::abs(eval_scalar(r, lambda_min) - std::pow(lambda_min, r.beta));
}

struct SelectKResult {
    std::size_t k = 0;
    bool tol_reached = false;           // false: returned k_max without meeting tol
    std::vector<double> epsilon_history;  // epsilon_k for k = 1..returned k
};

// Smallest k <= k_max with epsilon_k <= tol, using tau_opt for the operator.
inline SelectKResult select_k(const DiscreteLaplacian& L, double beta, double tol, std::size_t k_max) {
    if (!(tol > 0.0)) throw std::domain_error("select_k: tol must be positive");
    if (k_max == 0) throw std::domain_error("select_k: k_max must be >= 1");
    const double tau = tau_opt(L.lambda_min(), L.lambda_max());
    SelectKResult res;
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double eps = epsilon_k(build_coeffs(k, beta, tau), L.lambda_min());
        res.epsilon_history.push_back(eps);
        res.k = k;
        if (eps <= tol) {
            res.tol_reached = true;
            break;
        }
    }
    return res;
}

// Banded factorization R_k(L) = M^{-1} K with M = prod_j (eta_j I + L) and
// K = L * sum_j gamma_j prod_{i != j} (eta_i I + L). When the accumulated
// bandwidth would reach the matrix dimension the banded form is pointless;
// M and K are then left unassembled and only the partial-fraction route
// (apply_rational) remains usable.
struct FactorizedPower {
    RationalCoeffs coeffs;
    const DiscreteLaplacian* source = nullptr;  // not owned
    std::optional<BandedMatrix> M;
    std::optional<BandedMatrix> K;
    bool partial_fraction_only = false;

    // M^{-1} b through the factored form, one well-conditioned shifted solve
    // per factor. The assembled M can reach condition numbers near 1/eps for
    // large k, where a single banded elimination would lose most digits.
    std::vector<double> solve_mass(std::span<const double> b) const {
        std::vector<double> x(b.begin(), b.end());
        for (double eta : coeffs.eta) x = source->shifted_solve(eta, x);
        return x;
    }

    // M^{-1} K v; falls back to the partial fractions when K is unassembled.
    std::vector<double> apply(std::span<const double> v) const;
};

inline FactorizedPower assemble_mk(const RationalCoeffs& r, const DiscreteLaplacian& L) {
    FactorizedPower fp;
    fp.coeffs = r;
    fp.source = &L;
    const std::size_t n = L.size();
    const std::size_t band = L.matrix().upper_bandwidth();  // 1 in 1-D, N in 2-D
    if (r.k * band >= n) {
        fp.partial_fraction_only = true;
        return fp;
    }
    // Incremental expansion: P_m = prod_{j<=m} F_j and
    // G_m = sum_{j<=m} gamma_j prod_{i<=m, i!=j} F_i, with F_j = eta_j I + L;
    // G_{m+1} = G_m F_{m+1} + gamma_{m+1} P_m. Avoids the ill-conditioned
    // monomial expansion of the polynomials.
    BandedMatrix P = BandedMatrix::identity(n);
    BandedMatrix G(n, 0, 0);
    for (std::size_t j = 0; j < r.k; ++j) {
        BandedMatrix F = L.matrix();
        F.add_shift(r.eta[j]);
        BandedMatrix G_next = banded_sum(banded_multiply(G, F), 1.0, P, r.gamma[j]);
        P = banded_multiply(P, F);
        G = std::move(G_next);
    }
    fp.M = trim_zero_bands(P);
    fp.K = trim_zero_bands(banded_multiply(L.matrix(), G));
    return fp;
}

// R_k(L) v through the partial fractions: k independent shifted solves,
// summed in index order, followed by one application of L.
template <class Operator>
std::vector<double> apply_rational(const RationalCoeffs& r, const Operator& L,
                                   std::span<const double> v) {
    std::vector<double> acc(v.size(), 0.0);
    for (std::size_t j = 0; j < r.k; ++j) {
        const std::vector<double> xj = L.shifted_solve(r.eta[j], v);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += r.gamma[j] * xj[i];
    }
    return L.apply(acc);
}

inline std::vector<double> FactorizedPower::apply(std::span<const double> v) const {
    if (partial_fraction_only || !K) return apply_rational(coeffs, *source, v);
    return solve_mass(K->apply(v));
}

// max_s |lambda_s^beta - R_k(lambda_s)| over the analytic spectrum; the
// spectral-norm error of the approximation, since both sides are functions
// of the same symmetric operator.
inline double spectral_error(const RationalCoeffs& r, std::span<const double> eigenvalues) {
    double m = 0.0;
    for (double lam : eigenvalues) m = std::max(m, std::abs(eval_scalar(r, lam) - std::pow(lam, r.beta)));
    return m;
}

}  // namespace fraclap
