#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "fraclap/errors.hpp"

namespace fraclap {

// Jacobi weight (1-t)^a (1+t)^b on (-1,1).
struct JacobiWeight {
    double a;
    double b;

    void validate() const {
        if (!(a > -1.0) || !(b > -1.0))
            throw std::domain_error("JacobiWeight: need a > -1 and b > -1, got a=" +
                                    std::to_string(a) + " b=" + std::to_string(b));
    }

    // Weight used by the fractional-power integral: a = beta-1, b = -beta, 0 < beta < 1.
    static JacobiWeight fractional(double beta) {
        if (!(beta > 0.0) || !(beta < 1.0))
            throw std::domain_error("JacobiWeight::fractional: beta must lie in (0,1)");
        return {beta - 1.0, -beta};
    }
};

struct QuadratureRule {
    std::size_t k = 0;
    std::vector<double> nodes;    // strictly increasing, inside (-1,1)
    std::vector<double> weights;  // all positive
};

// mu0 = int_{-1}^{1} (1-t)^a (1+t)^b dt = 2^(a+b+1) B(a+1, b+1).
// For a = beta-1, b = -beta this reduces to pi/sin(beta*pi).
inline double zeroth_moment(const JacobiWeight& w) {
    w.validate();
    const double log_b = std::lgamma(w.a + 1.0) + std::lgamma(w.b + 1.0) - std::lgamma(w.a + w.b + 2.0);
    return std::exp2(w.a + w.b + 1.0) * std::exp(log_b);
}

struct RecurrencePair {
    double alpha;  // alpha_n
    double beta;   // beta_n, with beta_0 = mu0
};

// Coefficients of the monic three-term recurrence
//   p_{n+1}(t) = (t - alpha_n) p_n(t) - beta_n p_{n-1}(t)
// for the polynomials orthogonal w.r.t. the Jacobi weight.
inline std::vector<RecurrencePair> jacobi_recurrence(const JacobiWeight& w, std::size_t k) {
    w.validate();
    if (k == 0) throw std::domain_error("jacobi_recurrence: k must be >= 1");
    const double a = w.a, b = w.b;
    std::vector<RecurrencePair> rec(k);
    rec[0].alpha = (b - a) / (a + b + 2.0);
    rec[0].beta = zeroth_moment(w);
    for (std::size_t n = 1; n < k; ++n) {
        const double t2 = 2.0 * double(n) + a + b;
        rec[n].alpha = (b * b - a * a) / (t2 * (t2 + 2.0));
        if (n == 1)
            rec[n].beta = 4.0 * (a + 1.0) * (b + 1.0) / ((a + b + 2.0) * (a + b + 2.0) * (a + b + 3.0));
        else
            rec[n].beta = 4.0 * double(n) * (double(n) + a) * (double(n) + b) * (double(n) + a + b) /
                          (t2 * t2 * (t2 + 1.0) * (t2 - 1.0));
    }
    return rec;
}

namespace detail {

// Implicit-shift QL iteration for a symmetric tridiagonal matrix.
// d: diagonal, e: off-diagonal (e[i] couples i and i+1; e[n-1] is workspace).
// z accumulates the first row of the orthogonal transform, which is all the
// Golub-Welsch weights need. Adapted from the classic EISPACK imtql2 reduction.
inline void tridiagonal_ql_first_row(std::vector<double>& d, std::vector<double>& e,
                                     std::vector<double>& z) {
    const std::size_t n = d.size();
    if (n == 0) return;
    e.resize(n, 0.0);
    constexpr double kOffDiagTol = 1e-14;  // relative off-diagonal decay
    constexpr int kMaxSweeps = 50;

    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= kOffDiagTol * dd) break;
            }
            if (m != l) {
                if (++iter > kMaxSweeps)
                    throw NumericalError("tridiagonal QL: no convergence after " +
                                         std::to_string(kMaxSweeps) + " sweeps at index " +
                                         std::to_string(l) + " (n=" + std::to_string(n) + ")");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i1 = m; i1-- > l;) {
                    double f = s * e[i1];
                    const double bb = c * e[i1];
                    r = std::hypot(f, g);
                    e[i1 + 1] = r;
                    if (r == 0.0) {  // negligible rotation: deflate and restart the sweep
                        d[i1 + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i1 + 1] - p;
                    r = (d[i1] - g) * s + 2.0 * c * bb;
                    p = s * r;
                    d[i1 + 1] = g + p;
                    g = c * r - bb;
                    f = z[i1 + 1];
                    z[i1 + 1] = s * z[i1] + c * f;
                    z[i1] = c * z[i1] - s * f;
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace detail

// k-point Gauss-Jacobi rule by the Golub-Welsch construction: nodes are the
// eigenvalues of the symmetric tridiagonal recurrence matrix, weights are
// mu0 times the squared first eigenvector components.
inline QuadratureRule gauss_jacobi(const JacobiWeight& w, std::size_t k) {
    const auto rec = jacobi_recurrence(w, k);
    std::vector<double> d(k), e(k, 0.0), z(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        d[i] = rec[i].alpha;
        if (i + 1 < k) e[i] = std::sqrt(rec[i + 1].beta);
    }
    z[0] = 1.0;
    detail::tridiagonal_ql_first_row(d, e, z);

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });

    QuadratureRule rule;
    rule.k = k;
    rule.nodes.resize(k);
    rule.weights.resize(k);
    const double mu0 = rec[0].beta;
    for (std::size_t i = 0; i < k; ++i) {
        rule.nodes[i] = d[order[i]];
        rule.weights[i] = mu0 * z[order[i]] * z[order[i]];
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (!(rule.nodes[i] > -1.0 && rule.nodes[i] < 1.0))
            throw NumericalError("gauss_jacobi: node outside (-1,1)");
        if (i > 0 && !(rule.nodes[i] > rule.nodes[i - 1]))
            throw NumericalError("gauss_jacobi: nodes not strictly increasing");
        if (!(rule.weights[i] > 0.0))
            throw NumericalError("gauss_jacobi: nonpositive weight");
    }
    return rule;
}

}  // namespace fraclap
