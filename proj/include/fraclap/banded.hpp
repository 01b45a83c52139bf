#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fraclap/errors.hpp"

namespace fraclap {

// Square banded matrix in diagonal-major storage: one contiguous array per
// diagonal. Diagonal d in [-lower, upper] holds the entries (i, i+d); slot t
// of that array is the entry in row t + max(0, -d).
class BandedMatrix {
public:
    BandedMatrix() = default;

    BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper)
        : n_(n), lower_(n == 0 ? 0 : std::min(lower, n - 1)), upper_(n == 0 ? 0 : std::min(upper, n - 1)) {
        diags_.resize(lower_ + upper_ + 1);
        for (long d = -long(lower_); d <= long(upper_); ++d)
            diags_[std::size_t(d + long(lower_))].assign(n_ - std::size_t(std::labs(d)), 0.0);
    }

    static BandedMatrix identity(std::size_t n) {
        BandedMatrix m(n, 0, 0);
        std::fill(m.diags_[0].begin(), m.diags_[0].end(), 1.0);
        return m;
    }

    static BandedMatrix tridiagonal(std::size_t n, double sub, double diag, double super) {
        BandedMatrix m(n, 1, 1);
        std::fill(m.diag(-1).begin(), m.diag(-1).end(), sub);
        std::fill(m.diag(0).begin(), m.diag(0).end(), diag);
        std::fill(m.diag(1).begin(), m.diag(1).end(), super);
        return m;
    }

    std::size_t rows() const { return n_; }
    std::size_t lower_bandwidth() const { return lower_; }
    std::size_t upper_bandwidth() const { return upper_; }

    std::span<double> diag(long d) { return diags_[std::size_t(d + long(lower_))]; }
    std::span<const double> diag(long d) const { return diags_[std::size_t(d + long(lower_))]; }

    // Read anywhere (zero outside the band).
    double operator()(std::size_t i, std::size_t j) const {
        const long d = long(j) - long(i);
        if (d < -long(lower_) || d > long(upper_)) return 0.0;
        return diags_[std::size_t(d + long(lower_))][std::min(i, j)];
    }

    // Write access; (i,j) must lie inside the band.
    double& at(std::size_t i, std::size_t j) {
        const long d = long(j) - long(i);
        return diags_[std::size_t(d + long(lower_))][std::min(i, j)];
    }

    // y = A x
    void apply(std::span<const double> x, std::span<double> y) const {
        check_dim(x.size());
        std::fill(y.begin(), y.end(), 0.0);
        for (long d = -long(lower_); d <= long(upper_); ++d) {
            const auto band = diag(d);
            const std::size_t row0 = d < 0 ? std::size_t(-d) : 0;
            const std::size_t col0 = d > 0 ? std::size_t(d) : 0;
            for (std::size_t t = 0; t < band.size(); ++t) y[row0 + t] += band[t] * x[col0 + t];
        }
    }

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(n_);
        apply(x, y);
        return y;
    }

    BandedMatrix& scale(double c) {
        for (auto& band : diags_)
            for (double& v : band) v *= c;
        return *this;
    }

    BandedMatrix& add_shift(double c) {
        for (double& v : diag(0)) v += c;
        return *this;
    }

    // this += c * diag(w) applied from the right, i.e. scale column j by w[j].
    BandedMatrix& add_column_scaled(const BandedMatrix& A, std::span<const double> w, double c) {
        if (A.n_ != n_ || A.lower_ > lower_ || A.upper_ > upper_)
            throw std::domain_error("BandedMatrix::add_column_scaled: shape mismatch");
        for (long d = -long(A.lower_); d <= long(A.upper_); ++d) {
            const auto src = A.diag(d);
            auto dst = diag(d);
            const std::size_t col0 = d > 0 ? std::size_t(d) : 0;
            for (std::size_t t = 0; t < src.size(); ++t) dst[t] += c * src[t] * w[col0 + t];
        }
        return *this;
    }

    bool symmetric(double tol = 0.0) const {
        if (lower_ != upper_) return false;
        for (long d = 1; d <= long(upper_); ++d) {
            const auto up = diag(d), lo = diag(-d);
            for (std::size_t t = 0; t < up.size(); ++t)
                if (std::abs(up[t] - lo[t]) > tol) return false;
        }
        return true;
    }

private:
    void check_dim(std::size_t m) const {
        if (m != n_) throw std::domain_error("BandedMatrix: dimension mismatch");
    }

    std::size_t n_ = 0;
    std::size_t lower_ = 0;
    std::size_t upper_ = 0;
    std::vector<std::vector<double>> diags_;
};

// Drop outermost diagonals that are identically zero.
inline BandedMatrix trim_zero_bands(const BandedMatrix& A) {
    auto band_zero = [&A](long d) {
        for (double v : A.diag(d))
            if (v != 0.0) return false;
        return true;
    };
    std::size_t lo = A.lower_bandwidth(), up = A.upper_bandwidth();
    while (lo > 0 && band_zero(-long(lo))) --lo;
    while (up > 0 && band_zero(long(up))) --up;
    if (lo == A.lower_bandwidth() && up == A.upper_bandwidth()) return A;
    BandedMatrix B(A.rows(), lo, up);
    for (long d = -long(lo); d <= long(up); ++d) {
        const auto src = A.diag(d);
        auto dst = B.diag(d);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return B;
}

// ca*A + cb*B with bandwidths widened as needed.
inline BandedMatrix banded_sum(const BandedMatrix& A, double ca, const BandedMatrix& B, double cb) {
    if (A.rows() != B.rows()) throw std::domain_error("banded_sum: dimension mismatch");
    BandedMatrix C(A.rows(), std::max(A.lower_bandwidth(), B.lower_bandwidth()),
                   std::max(A.upper_bandwidth(), B.upper_bandwidth()));
    for (const auto* src : {&A, &B}) {
        const double c = src == &A ? ca : cb;
        for (long d = -long(src->lower_bandwidth()); d <= long(src->upper_bandwidth()); ++d) {
            const auto band = src->diag(d);
            auto out = C.diag(d);
            for (std::size_t t = 0; t < band.size(); ++t) out[t] += c * band[t];
        }
    }
    return C;
}

// Exact banded product; bandwidths add.
inline BandedMatrix banded_multiply(const BandedMatrix& A, const BandedMatrix& B) {
    if (A.rows() != B.rows()) throw std::domain_error("banded_multiply: dimension mismatch");
    const std::size_t n = A.rows();
    const std::size_t cl = std::min(A.lower_bandwidth() + B.lower_bandwidth(), n == 0 ? 0 : n - 1);
    const std::size_t cu = std::min(A.upper_bandwidth() + B.upper_bandwidth(), n == 0 ? 0 : n - 1);
    BandedMatrix C(n, cl, cu);
    for (long da = -long(A.lower_bandwidth()); da <= long(A.upper_bandwidth()); ++da) {
        const auto a = A.diag(da);
        for (long db = -long(B.lower_bandwidth()); db <= long(B.upper_bandwidth()); ++db) {
            const long dc = da + db;
            if (dc < -long(cl) || dc > long(cu)) continue;
            const auto b = B.diag(db);
            auto c = C.diag(dc);
            // rows where (i, i+da) and (i+da, i+dc) both exist
            const long lo = std::max({long(0), -da, -dc});
            const long hi = std::min({long(n) - 1, long(n) - 1 - da, long(n) - 1 - dc});
            const long sa = std::max(long(0), -da), sb = std::max(long(0), -db),
                       sc = std::max(long(0), -dc);
            for (long i = lo; i <= hi; ++i)
                c[std::size_t(i - sc)] += a[std::size_t(i - sa)] * b[std::size_t(i + da - sb)];
        }
    }
    return C;
}

// LU factorization of a banded matrix without pivoting (intended for the
// symmetric positive definite operators assembled here, where pivot-free
// elimination is stable). No fill is generated outside the original bands.
class BandedLU {
public:
    explicit BandedLU(const BandedMatrix& A) : lu_(A) {
        const std::size_t n = lu_.rows();
        const std::size_t bl = lu_.lower_bandwidth(), bu = lu_.upper_bandwidth();
        for (std::size_t k = 0; k < n; ++k) {
            const double piv = lu_(k, k);
            if (!(std::abs(piv) > 0.0) || !std::isfinite(piv))
                throw NumericalError("BandedLU: zero or non-finite pivot at row " + std::to_string(k));
            const std::size_t imax = std::min(k + bl, n == 0 ? 0 : n - 1);
            const std::size_t jmax = std::min(k + bu, n == 0 ? 0 : n - 1);
            for (std::size_t i = k + 1; i <= imax && i < n; ++i) {
                const double m = lu_(i, k) / piv;
                lu_.at(i, k) = m;
                for (std::size_t j = k + 1; j <= jmax; ++j) lu_.at(i, j) -= m * lu_(k, j);
            }
        }
    }

    void solve_in_place(std::span<double> x) const {
        const std::size_t n = lu_.rows();
        if (x.size() != n) throw std::domain_error("BandedLU::solve: dimension mismatch");
        const std::size_t bl = lu_.lower_bandwidth(), bu = lu_.upper_bandwidth();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j0 = i > bl ? i - bl : 0;
            double s = x[i];
            for (std::size_t j = j0; j < i; ++j) s -= lu_(i, j) * x[j];
            x[i] = s;
        }
        for (std::size_t i1 = n; i1-- > 0;) {
            const std::size_t jmax = std::min(i1 + bu, n - 1);
            double s = x[i1];
            for (std::size_t j = i1 + 1; j <= jmax; ++j) s -= lu_(i1, j) * x[j];
            x[i1] = s / lu_(i1, i1);
        }
    }

    std::vector<double> solve(std::span<const double> b) const {
        std::vector<double> x(b.begin(), b.end());
        solve_in_place(x);
        return x;
    }

private:
    BandedMatrix lu_;
};

inline BandedLU factorize(const BandedMatrix& A) { return BandedLU(A); }

// (mass or I) + a * stiff  -- the theta-stage operator.
inline BandedMatrix stage_matrix(const BandedMatrix* mass, double a, const BandedMatrix& stiff) {
    if (mass) return banded_sum(*mass, 1.0, stiff, a);
    BandedMatrix W = stiff;
    W.scale(a);
    W.add_shift(1.0);
    return W;
}

// W -= (mass or I) * diag(w)  -- Newton correction for u-dependent forcing.
inline void subtract_mass_column_scaled(BandedMatrix& W, const BandedMatrix* mass,
                                        std::span<const double> w) {
    if (mass) {
        W.add_column_scaled(*mass, w, -1.0);
    } else {
        auto d0 = W.diag(0);
        for (std::size_t i = 0; i < d0.size(); ++i) d0[i] -= w[i];
    }
}

}  // namespace fraclap
