#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "fraclap/dense.hpp"
#include "fraclap/laplacian.hpp"

namespace fraclap {

// Discrete sine eigensystem of tridiag(-1,2,-1): the transform matrix
// S[i][s] = sqrt(2/(N+1)) sin((i+1)(s+1) pi/(N+1)) is symmetric, orthogonal
// and involutory, so analysis and synthesis are the same product.
class SineBasis {
public:
    explicit SineBasis(std::size_t N) : N_(N), S_(N * N) {
        const double f = std::numbers::pi / double(N + 1);
        const double norm = std::sqrt(2.0 / double(N + 1));
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t s = 0; s < N; ++s)
                S_[i * N + s] = norm * std::sin(double(i + 1) * double(s + 1) * f);
    }

    std::size_t size() const { return N_; }

    // 1-D eigenvalue for mode s in [1..N]
    double eigenvalue(std::size_t s) const {
        return 2.0 - 2.0 * std::cos(double(s) * std::numbers::pi / double(N_ + 1));
    }

    // c = S v (equals the inverse transform; S^2 = I)
    void transform(std::span<const double> v, std::span<double> c) const {
        for (std::size_t i = 0; i < N_; ++i) {
            const double* row = S_.data() + i * N_;
            double s = 0.0;
            for (std::size_t j = 0; j < N_; ++j) s += row[j] * v[j];
            c[i] = s;
        }
    }

    double entry(std::size_t i, std::size_t s) const { return S_[i * N_ + s]; }

private:
    std::size_t N_;
    std::vector<double> S_;
};

namespace detail {

// 2-D separable transform: out = S X S with X the field as an N x N array.
inline void sine_transform_2d(const SineBasis& basis, std::span<const double> v,
                              std::span<double> out) {
    const std::size_t N = basis.size();
    std::vector<double> tmp(N * N), col(N), res(N);
    // rows
    for (std::size_t iy = 0; iy < N; ++iy)
        basis.transform(v.subspan(iy * N, N), std::span<double>(tmp.data() + iy * N, N));
    // columns
    for (std::size_t ix = 0; ix < N; ++ix) {
        for (std::size_t iy = 0; iy < N; ++iy) col[iy] = tmp[iy * N + ix];
        basis.transform(col, res);
        for (std::size_t iy = 0; iy < N; ++iy) out[iy * N + ix] = res[iy];
    }
}

}  // namespace detail

// g(L) v via the analytic eigensystem: transform, scale by g(mu_s), transform back.
inline std::vector<double> apply_spectral_function(const DiscreteLaplacian& L,
                                                   const std::function<double(double)>& g,
                                                   std::span<const double> v) {
    if (v.size() != L.size()) throw std::domain_error("apply_spectral_function: dimension mismatch");
    const SineBasis basis(L.points_per_direction());
    const std::size_t N = basis.size();
    std::vector<double> c(L.size()), out(L.size());
    if (L.dimension() == 1) {
        basis.transform(v, c);
        for (std::size_t s = 0; s < N; ++s) c[s] *= g(basis.eigenvalue(s + 1));
        basis.transform(c, out);
        return out;
    }
    detail::sine_transform_2d(basis, v, c);
    for (std::size_t sy = 0; sy < N; ++sy)
        for (std::size_t sx = 0; sx < N; ++sx)
            c[sy * N + sx] *= g(basis.eigenvalue(sx + 1) + basis.eigenvalue(sy + 1));
    detail::sine_transform_2d(basis, c, out);
    return out;
}

// Reference L^beta v (matrix transfer building block), exact up to rounding.
inline std::vector<double> frac_power_apply(const DiscreteLaplacian& L, double beta,
                                            std::span<const double> v) {
    if (!(beta > 0.0) || !(beta < 1.0)) throw std::domain_error("frac_power_apply: beta must lie in (0,1)");
    return apply_spectral_function(L, [beta](double mu) { return std::pow(mu, beta); }, v);
}

// Dense L^beta for the matrix-transfer integration path.
inline DenseMatrix frac_power_matrix(const DiscreteLaplacian& L, double beta) {
    if (!(beta > 0.0) || !(beta < 1.0)) throw std::domain_error("frac_power_matrix: beta must lie in (0,1)");
    const SineBasis basis(L.points_per_direction());
    const std::size_t N = basis.size();
    if (L.dimension() == 1) {
        // A = S diag(mu^beta) S
        DenseMatrix DS(N);
        for (std::size_t s = 0; s < N; ++s) {
            const double d = std::pow(basis.eigenvalue(s + 1), beta);
            for (std::size_t j = 0; j < N; ++j) DS(s, j) = d * basis.entry(s, j);
        }
        DenseMatrix S(N);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t s = 0; s < N; ++s) S(i, s) = basis.entry(i, s);
        return dense_multiply(S, DS);
    }
    // A = P diag(d) P with P = S (x) S, symmetric like S.
    const std::size_t n = N * N;
    DenseMatrix P(n), PD(n);
    for (std::size_t iy = 0; iy < N; ++iy)
        for (std::size_t ix = 0; ix < N; ++ix) {
            const std::size_t row = iy * N + ix;
            for (std::size_t sy = 0; sy < N; ++sy)
                for (std::size_t sx = 0; sx < N; ++sx)
                    P(row, sy * N + sx) = basis.entry(iy, sy) * basis.entry(ix, sx);
        }
    for (std::size_t row = 0; row < n; ++row) {
        auto src = P.row(row);
        auto dst = PD.row(row);
        for (std::size_t sy = 0; sy < N; ++sy)
            for (std::size_t sx = 0; sx < N; ++sx) {
                const std::size_t col = sy * N + sx;
                dst[col] = src[col] * std::pow(basis.eigenvalue(sx + 1) + basis.eigenvalue(sy + 1), beta);
            }
    }
    return dense_multiply(PD, P);
}

// ---- closed-form / series solutions of the benchmark problems -------------

// Series solution on (0,pi) for u0 = x^2(pi - x), f = 0:
//   u(x,t) = sum_n (8(-1)^(n+1) - 4)/n^3 sin(nx) exp(-kappa n^alpha t).
// Partial sum over `terms` terms; the coefficient decay n^-3 bounds the
// truncation tail by ~6/terms^2 at t = 0 and far less for t > 0.
inline double exact_solution_example1(double x, double t, double alpha, double kappa,
                                      std::size_t terms) {
    double s = 0.0;
    for (std::size_t n = 1; n <= terms; ++n) {
        const double nn = double(n);
        const double coef = (n % 2 == 1 ? 4.0 : -12.0) / (nn * nn * nn);
        s += coef * std::sin(nn * x) * std::exp(-kappa * std::pow(nn, alpha) * t);
    }
    return s;
}

// u = t^alpha x^2 (1-x)^2 on (0,1).
inline double exact_solution_example3(double x, double t, double alpha) {
    return (t == 0.0 ? 0.0 : std::pow(t, alpha)) * x * x * (1.0 - x) * (1.0 - x);
}

inline double sin_cubed(double t) {
    const double s = std::sin(t);
    return s * s * s;
}

// u = t^alpha sin^3(pi x) sin^3(pi y) on the unit square.
inline double exact_solution_example4(double x, double y, double t, double alpha) {
    return (t == 0.0 ? 0.0 : std::pow(t, alpha)) * sin_cubed(std::numbers::pi * x) *
           sin_cubed(std::numbers::pi * y);
}

}  // namespace fraclap
