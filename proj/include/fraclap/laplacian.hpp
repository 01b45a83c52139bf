#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fraclap/banded.hpp"
#include "fraclap/errors.hpp"

namespace fraclap {

// Finite-difference Laplacian on a uniform mesh with homogeneous Dirichlet
// boundary: tridiag(-1,2,-1) in 1-D, the 5-point block operator
// tridiag(-I, B, -I), B = tridiag(-1,4,-1), on the unit square in 2-D.
// The matrix is kept in scalar banded form for assembling polynomial factors;
// 2-D matrix-vector products use the Kronecker identity L2 = I(x)T + T(x)I.
class DiscreteLaplacian {
public:
    int dimension() const { return dim_; }
    std::size_t points_per_direction() const { return N_; }
    std::size_t size() const { return dim_ == 1 ? N_ : N_ * N_; }
    double mesh_width() const { return h_; }
    double lambda_min() const { return lambda_min_; }
    double lambda_max() const { return lambda_max_; }
    double condition_number() const { return lambda_max_ / lambda_min_; }

    const BandedMatrix& matrix() const { return op_; }

    // Analytic eigenvalues, ascending. 1-D: 2-2cos(s pi/(N+1)); 2-D: pairwise sums.
    std::vector<double> eigenvalues() const {
        std::vector<double> one(N_);
        for (std::size_t s = 1; s <= N_; ++s)
            one[s - 1] = 2.0 - 2.0 * std::cos(double(s) * std::numbers::pi / double(N_ + 1));
        if (dim_ == 1) return one;
        std::vector<double> two;
        two.reserve(N_ * N_);
        for (double a : one)
            for (double b : one) two.push_back(a + b);
        std::sort(two.begin(), two.end());
        return two;
    }

    // y = L x. 2-D uses the tensor identity instead of the banded form.
    void apply(std::span<const double> x, std::span<double> y) const {
        if (x.size() != size() || y.size() != size())
            throw std::domain_error("DiscreteLaplacian::apply: dimension mismatch");
        if (dim_ == 1) {
            op_.apply(x, y);
            return;
        }
        const std::size_t N = N_;
        for (std::size_t iy = 0; iy < N; ++iy) {
            const double* xr = x.data() + iy * N;
            double* yr = y.data() + iy * N;
            for (std::size_t ix = 0; ix < N; ++ix) {
                double s = 4.0 * xr[ix];
                if (ix > 0) s -= xr[ix - 1];
                if (ix + 1 < N) s -= xr[ix + 1];
                if (iy > 0) s -= x[(iy - 1) * N + ix];
                if (iy + 1 < N) s -= x[(iy + 1) * N + ix];
                yr[ix] = s;
            }
        }
    }

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(size());
        apply(x, y);
        return y;
    }

    // Solve (eta I + L) x = rhs. Direct banded elimination in 1-D; diagonally
    // preconditioned conjugate gradients on the Kronecker form in 2-D.
    std::vector<double> shifted_solve(double eta, std::span<const double> rhs) const {
        if (!(eta > 0.0)) throw std::domain_error("shifted_solve: eta must be positive");
        if (rhs.size() != size()) throw std::domain_error("shifted_solve: dimension mismatch");
        if (dim_ == 1) {
            BandedMatrix A = op_;
            A.add_shift(eta);
            return BandedLU(A).solve(rhs);
        }
        return pcg_shifted(eta, rhs);
    }

    friend DiscreteLaplacian laplacian_1d(std::size_t N, double domain_length);
    friend DiscreteLaplacian laplacian_2d(std::size_t N);

private:
    std::vector<double> pcg_shifted(double eta, std::span<const double> b) const {
        const std::size_t n = size();
        const double pre = 1.0 / (eta + 4.0);  // constant diagonal of eta I + L2
        const double bnorm = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
        std::vector<double> x(n, 0.0);
        if (bnorm == 0.0) return x;
        constexpr double kRelResidual = 1e-12;
        std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = pre * r[i];
        p = z;
        double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
        const std::size_t max_iter = 10 * n;
        for (std::size_t it = 0; it < max_iter; ++it) {
            apply(p, q);
            for (std::size_t i = 0; i < n; ++i) q[i] += eta * p[i];
            const double pq = std::inner_product(p.begin(), p.end(), q.begin(), 0.0);
            const double alpha = rz / pq;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            const double rnorm = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
            if (rnorm <= kRelResidual * bnorm) return x;
            for (std::size_t i = 0; i < n; ++i) z[i] = pre * r[i];
            const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        throw NumericalError("shifted_solve: PCG did not reach relative residual 1e-12 in " +
                             std::to_string(max_iter) + " iterations (eta=" + std::to_string(eta) + ")");
    }

    int dim_ = 1;
    std::size_t N_ = 0;
    double h_ = 0.0;
    double lambda_min_ = 0.0;
    double lambda_max_ = 0.0;
    BandedMatrix op_;
};

inline DiscreteLaplacian laplacian_1d(std::size_t N, double domain_length) {
    if (N < 2) throw std::domain_error("laplacian_1d: need N >= 2");
    if (!(domain_length > 0.0)) throw std::domain_error("laplacian_1d: domain length must be positive");
    DiscreteLaplacian L;
    L.dim_ = 1;
    L.N_ = N;
    L.h_ = domain_length / double(N + 1);
    L.lambda_min_ = 2.0 - 2.0 * std::cos(std::numbers::pi / double(N + 1));
    L.lambda_max_ = 2.0 - 2.0 * std::cos(double(N) * std::numbers::pi / double(N + 1));
    L.op_ = BandedMatrix::tridiagonal(N, -1.0, 2.0, -1.0);
    return L;
}

inline DiscreteLaplacian laplacian_2d(std::size_t N) {
    if (N < 2) throw std::domain_error("laplacian_2d: need N >= 2");
    DiscreteLaplacian L;
    L.dim_ = 2;
    L.N_ = N;
    L.h_ = 1.0 / double(N + 1);
    const double l1 = 2.0 - 2.0 * std::cos(std::numbers::pi / double(N + 1));
    const double lN = 2.0 - 2.0 * std::cos(double(N) * std::numbers::pi / double(N + 1));
    L.lambda_min_ = 2.0 * l1;
    L.lambda_max_ = 2.0 * lN;
    const std::size_t n = N * N;
    BandedMatrix A(n, N, N);
    for (std::size_t r = 0; r < n; ++r) {
        A.at(r, r) = 4.0;
        const std::size_t ix = r % N;
        if (ix + 1 < N) A.at(r, r + 1) = -1.0;      // next point in x unless at a block edge
        if (ix > 0) A.at(r, r - 1) = -1.0;
        if (r + N < n) A.at(r, r + N) = -1.0;
        if (r >= N) A.at(r, r - N) = -1.0;
    }
    L.op_ = std::move(A);
    return L;
}

}  // namespace fraclap
