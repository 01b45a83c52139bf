#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fraclap/errors.hpp"

namespace fraclap {

// Minimal dense square matrix, row-major. Used for the matrix-transfer
// reference path, where L^beta is genuinely dense.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * n_, n_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

    void apply(std::span<const double> x, std::span<double> y) const {
        if (x.size() != n_) throw std::domain_error("DenseMatrix: dimension mismatch");
        for (std::size_t i = 0; i < n_; ++i) {
            const double* r = data_.data() + i * n_;
            double s = 0.0;
            for (std::size_t j = 0; j < n_; ++j) s += r[j] * x[j];
            y[i] = s;
        }
    }

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(n_);
        apply(x, y);
        return y;
    }

    DenseMatrix& scale(double c) {
        for (double& v : data_) v *= c;
        return *this;
    }

    DenseMatrix& add_shift(double c) {
        for (std::size_t i = 0; i < n_; ++i) data_[i * n_ + i] += c;
        return *this;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

// C = A * B (ikj loop order keeps the inner traversals contiguous).
inline DenseMatrix dense_multiply(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.rows() != B.rows()) throw std::domain_error("dense_multiply: dimension mismatch");
    const std::size_t n = A.rows();
    DenseMatrix C(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto ci = C.row(i);
        const auto ai = A.row(i);
        for (std::size_t k = 0; k < n; ++k) {
            const double a = ai[k];
            if (a == 0.0) continue;
            const auto bk = B.row(k);
            for (std::size_t j = 0; j < n; ++j) ci[j] += a * bk[j];
        }
    }
    return C;
}

// Pivot-free dense LU; the stage matrices I + a*L^beta handled here are
// symmetric positive definite, where this is stable.
class DenseLU {
public:
    explicit DenseLU(const DenseMatrix& A) : lu_(A) {
        const std::size_t n = lu_.rows();
        for (std::size_t k = 0; k < n; ++k) {
            const double piv = lu_(k, k);
            if (!(std::abs(piv) > 0.0) || !std::isfinite(piv))
                throw NumericalError("DenseLU: zero or non-finite pivot at row " + std::to_string(k));
            const auto rk = lu_.row(k);
            for (std::size_t i = k + 1; i < n; ++i) {
                const double m = lu_(i, k) / piv;
                lu_(i, k) = m;
                auto ri = lu_.row(i);
                for (std::size_t j = k + 1; j < n; ++j) ri[j] -= m * rk[j];
            }
        }
    }

    void solve_in_place(std::span<double> x) const {
        const std::size_t n = lu_.rows();
        if (x.size() != n) throw std::domain_error("DenseLU::solve: dimension mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            double s = x[i];
            const auto ri = lu_.row(i);
            for (std::size_t j = 0; j < i; ++j) s -= ri[j] * x[j];
            x[i] = s;
        }
        for (std::size_t i1 = n; i1-- > 0;) {
            double s = x[i1];
            const auto ri = lu_.row(i1);
            for (std::size_t j = i1 + 1; j < n; ++j) s -= ri[j] * x[j];
            x[i1] = s / ri[i1];
        }
    }

    std::vector<double> solve(std::span<const double> b) const {
        std::vector<double> x(b.begin(), b.end());
        solve_in_place(x);
        return x;
    }

private:
    DenseMatrix lu_;
};

inline DenseLU factorize(const DenseMatrix& A) { return DenseLU(A); }

inline DenseMatrix stage_matrix(const DenseMatrix* mass, double a, const DenseMatrix& stiff) {
    DenseMatrix W = stiff;
    W.scale(a);
    if (mass) {
        for (std::size_t i = 0; i < W.rows(); ++i) {
            auto wi = W.row(i);
            const auto mi = mass->row(i);
            for (std::size_t j = 0; j < wi.size(); ++j) wi[j] += mi[j];
        }
    } else {
        W.add_shift(1.0);
    }
    return W;
}

inline void subtract_mass_column_scaled(DenseMatrix& W, const DenseMatrix* mass,
                                        std::span<const double> w) {
    const std::size_t n = W.rows();
    if (mass) {
        for (std::size_t i = 0; i < n; ++i) {
            auto wi = W.row(i);
            const auto mi = mass->row(i);
            for (std::size_t j = 0; j < n; ++j) wi[j] -= mi[j] * w[j];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) W(i, i) -= w[i];
    }
}

}  // namespace fraclap
