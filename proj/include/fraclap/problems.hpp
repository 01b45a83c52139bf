#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "fraclap/integrator.hpp"
#include "fraclap/laplacian.hpp"
#include "fraclap/rational.hpp"
#include "fraclap/spectral.hpp"

namespace fraclap {

// Fractional reaction-diffusion problem
//   u_t = -kappa (-Laplace)^(alpha/2) u + f(x,t,u)
// on (0,a) or the unit square, homogeneous Dirichlet boundary. The forcing is
// split as f = g(x,y,t) + c_u * u, which covers every benchmark here (the
// integrator additionally accepts arbitrary f(t,u) callables directly).
struct ProblemDefinition {
    std::string name = "custom";
    int dimension = 1;
    double domain_length = 1.0;  // 1-D interval (0, a); ignored in 2-D (unit square)
    double alpha = 1.5;          // fractional order, 1 < alpha <= 2
    double kappa = 1.0;          // diffusivity kappa_alpha

    std::function<double(double x, double y, double t)> forcing_xt;  // g; null means 0
    double forcing_u_coeff = 0.0;                                    // c_u
    std::function<double(double x, double y)> initial;               // u0; null means 0
    std::function<double(double x, double y, double t)> exact;       // optional

    std::size_t default_points = 50;
    std::size_t default_k = 5;
    double default_t_end = 1.0;

    void validate() const {
        if (dimension != 1 && dimension != 2)
            throw std::domain_error("ProblemDefinition: dimension must be 1 or 2");
        if (!(alpha > 1.0) || !(alpha <= 2.0))
            throw std::domain_error("ProblemDefinition: alpha must lie in (1, 2]");
        if (!(kappa > 0.0)) throw std::domain_error("ProblemDefinition: kappa must be positive");
        if (!(domain_length > 0.0))
            throw std::domain_error("ProblemDefinition: domain length must be positive");
    }

    double beta() const { return 0.5 * alpha; }
};

// Diffusion of u0 = x^2(pi - x) on (0,pi); the solution has the classical
// sine-series form used as the exact reference.
inline ProblemDefinition example1(double alpha = 1.8, double kappa = 0.25) {
    ProblemDefinition p;
    p.name = "example1";
    p.dimension = 1;
    p.domain_length = std::numbers::pi;
    p.alpha = alpha;
    p.kappa = kappa;
    p.initial = [](double x, double) { return x * x * (std::numbers::pi - x); };
    p.exact = [alpha, kappa](double x, double, double t) {
        return exact_solution_example1(x, t, alpha, kappa, 10000);
    };
    p.default_points = 200;
    p.default_k = 2;
    p.default_t_end = 0.4;
    return p;
}

// Same setting with the oscillatory initial condition u0 = sin(4x); no closed
// form, runs are compared against the matrix-transfer path.
inline ProblemDefinition example2(double alpha = 1.9, double kappa = 0.25) {
    ProblemDefinition p;
    p.name = "example2";
    p.dimension = 1;
    p.domain_length = std::numbers::pi;
    p.alpha = alpha;
    p.kappa = kappa;
    p.initial = [](double x, double) { return std::sin(4.0 * x); };
    p.default_points = 500;
    p.default_k = 3;
    p.default_t_end = 0.3;
    return p;
}

// Forced problem on (0,1) with exact solution t^alpha x^2 (1-x)^2. The forcing
// is the Riesz-form expression with Gamma-function coefficients; both power
// terms vanish at t = 0 for alpha > 1, so f(.,0) is defined as exactly zero.
inline ProblemDefinition example3(double alpha = 1.7, double kappa = 2.0) {
    ProblemDefinition p;
    p.name = "example3";
    p.dimension = 1;
    p.domain_length = 1.0;
    p.alpha = alpha;
    p.kappa = kappa;
    p.initial = {};
    p.forcing_xt = [alpha, kappa](double x, double, double t) {
        if (t <= 0.0) return 0.0;
        const double g3 = std::tgamma(3.0 - alpha);
        const double g4 = std::tgamma(4.0 - alpha);
        const double g5 = std::tgamma(5.0 - alpha);
        const double xc = 1.0 - x;
        const double bracket = 2.0 / g3 * (std::pow(x, 2.0 - alpha) + std::pow(xc, 2.0 - alpha)) -
                               12.0 / g4 * (std::pow(x, 3.0 - alpha) + std::pow(xc, 3.0 - alpha)) +
                               24.0 / g5 * (std::pow(x, 4.0 - alpha) + std::pow(xc, 4.0 - alpha));
        return kappa * std::pow(t, alpha) / (2.0 * std::cos(alpha * std::numbers::pi / 2.0)) * bracket +
               alpha * std::pow(t, alpha - 1.0) * x * x * xc * xc;
    };
    p.exact = [alpha](double x, double, double t) { return exact_solution_example3(x, t, alpha); };
    p.default_points = 400;
    p.default_k = 5;
    p.default_t_end = 0.5;
    return p;
}

// Two-dimensional forced problem with exact solution t^alpha sin^3(pi x) sin^3(pi y);
// the forcing decomposes over four sine modes and carries the affine term -kappa u.
inline ProblemDefinition example4(double alpha = 1.5, double kappa = 10.0) {
    ProblemDefinition p;
    p.name = "example4";
    p.dimension = 2;
    p.domain_length = 1.0;
    p.alpha = alpha;
    p.kappa = kappa;
    p.initial = {};
    const double pi2 = std::numbers::pi * std::numbers::pi;
    struct Mode {
        double coef;
        int sx, sy;
        double mu;
    };
    const std::vector<Mode> modes = {{9.0, 1, 1, 2.0 * pi2},
                                     {-3.0, 1, 3, 10.0 * pi2},
                                     {-3.0, 3, 1, 10.0 * pi2},
                                     {1.0, 3, 3, 18.0 * pi2}};
    p.forcing_xt = [alpha, kappa, modes](double x, double y, double t) {
        if (t <= 0.0) return 0.0;
        double s = 0.0;
        for (const Mode& m : modes)
            s += (1.0 + std::pow(m.mu, alpha / 2.0)) * m.coef *
                 std::sin(m.sx * std::numbers::pi * x) * std::sin(m.sy * std::numbers::pi * y);
        return std::pow(t, alpha) * kappa / 16.0 * s +
               alpha * std::pow(t, alpha - 1.0) * sin_cubed(std::numbers::pi * x) *
                   sin_cubed(std::numbers::pi * y);
    };
    p.forcing_u_coeff = -kappa;
    p.exact = [alpha](double x, double y, double t) { return exact_solution_example4(x, y, t, alpha); };
    p.default_points = 40;
    p.default_k = 7;
    p.default_t_end = 1.0;
    return p;
}

inline ProblemDefinition problem_by_name(const std::string& name) {
    if (name == "example1" || name == "1") return example1();
    if (name == "example2" || name == "2") return example2();
    if (name == "example3" || name == "3") return example3();
    if (name == "example4" || name == "4") return example4();
    throw std::domain_error("unknown problem name: " + name);
}

inline ProblemDefinition problem_by_name(const std::string& name, double alpha, double kappa) {
    if (name == "example1" || name == "1") return example1(alpha, kappa);
    if (name == "example2" || name == "2") return example2(alpha, kappa);
    if (name == "example3" || name == "3") return example3(alpha, kappa);
    if (name == "example4" || name == "4") return example4(alpha, kappa);
    throw std::domain_error("unknown problem name: " + name);
}

// Generic pure-diffusion problem from a key = value configuration
// (keys: dimension, N, alpha, kappa, t_end, k; unknown keys are rejected by
// the CLI layer). Initial data is the polynomial bump compatible with the
// Dirichlet boundary.
inline ProblemDefinition problem_from_config(const std::map<std::string, std::string>& kv) {
    ProblemDefinition p;
    p.name = "custom";
    auto get = [&kv](const std::string& key, double dflt) {
        auto it = kv.find(key);
        return it == kv.end() ? dflt : std::stod(it->second);
    };
    p.dimension = int(get("dimension", 1));
    p.domain_length = get("domain_length", 1.0);
    p.alpha = get("alpha", 1.5);
    p.kappa = get("kappa", 1.0);
    p.default_points = std::size_t(get("N", 50));
    p.default_k = std::size_t(get("k", 5));
    p.default_t_end = get("t_end", 1.0);
    if (p.dimension == 2) {
        p.initial = [](double x, double y) { return x * (1.0 - x) * y * (1.0 - y); };
    } else {
        const double a = p.domain_length;
        p.initial = [a](double x, double) { return x * (a - x); };
    }
    p.validate();
    return p;
}

// A problem bound to a mesh: the discrete Laplacian, node coordinates, the
// kappa/h^alpha scaling and vectorized forcing/initial/exact evaluations.
class DiscretizedProblem {
public:
    DiscretizedProblem(ProblemDefinition def, std::size_t N) : def_(std::move(def)) {
        def_.validate();
        if (def_.dimension == 1) {
            lap_ = laplacian_1d(N, def_.domain_length);
            x_.resize(N);
            y_.assign(N, 0.0);
            for (std::size_t i = 0; i < N; ++i) x_[i] = double(i + 1) * lap_.mesh_width();
        } else {
            lap_ = laplacian_2d(N);
            const double h = lap_.mesh_width();
            x_.resize(N * N);
            y_.resize(N * N);
            for (std::size_t iy = 0; iy < N; ++iy)
                for (std::size_t ix = 0; ix < N; ++ix) {
                    x_[iy * N + ix] = double(ix + 1) * h;
                    y_[iy * N + ix] = double(iy + 1) * h;
                }
        }
    }

    const ProblemDefinition& definition() const { return def_; }
    const DiscreteLaplacian& laplacian() const { return lap_; }
    std::span<const double> xs() const { return x_; }
    std::span<const double> ys() const { return y_; }

    // c = kappa / h^alpha, the scaling in front of L^(alpha/2).
    double stiffness_scale() const { return def_.kappa / std::pow(lap_.mesh_width(), def_.alpha); }

    std::vector<double> initial_vector() const {
        std::vector<double> u0(lap_.size(), 0.0);
        if (def_.initial)
            for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = def_.initial(x_[i], y_[i]);
        return u0;
    }

    bool has_exact() const { return bool(def_.exact); }

    std::vector<double> exact_vector(double t) const {
        if (!def_.exact) throw std::domain_error("exact_vector: problem has no exact solution");
        std::vector<double> u(lap_.size());
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = def_.exact(x_[i], y_[i], t);
        return u;
    }

    bool forcing_depends_on_u() const { return def_.forcing_u_coeff != 0.0; }
    bool has_forcing() const { return bool(def_.forcing_xt) || def_.forcing_u_coeff != 0.0; }

    // Vectorized forcing; the x,t part is evaluated once per stage time and
    // cached (Gamma-function calls dominate otherwise). Each returned callable
    // owns its cache, so distinct integrations stay independent.
    ForcingFn make_forcing() const {
        if (!has_forcing()) return {};
        struct State {
            std::vector<double> x, y;
            std::function<double(double, double, double)> g;
            double u_coeff;
            double cached_t = std::numeric_limits<double>::quiet_NaN();
            std::vector<double> cached_g;
        };
        auto st = std::make_shared<State>();
        st->x.assign(x_.begin(), x_.end());
        st->y.assign(y_.begin(), y_.end());
        st->g = def_.forcing_xt;
        st->u_coeff = def_.forcing_u_coeff;
        st->cached_g.assign(x_.size(), 0.0);
        return [st](double t, std::span<const double> u) {
            if (st->g && t != st->cached_t) {
                for (std::size_t i = 0; i < st->x.size(); ++i)
                    st->cached_g[i] = st->g(st->x[i], st->y[i], t);
                st->cached_t = t;
            }
            std::vector<double> f = st->cached_g;
            if (st->u_coeff != 0.0)
                for (std::size_t i = 0; i < f.size(); ++i) f[i] += st->u_coeff * u[i];
            return f;
        };
    }

    JacobianDiagFn make_forcing_jacobian() const {
        if (!forcing_depends_on_u()) return {};
        const double c = def_.forcing_u_coeff;
        return [c](double, std::span<const double> u) { return std::vector<double>(u.size(), c); };
    }

private:
    ProblemDefinition def_;
    DiscreteLaplacian lap_;
    std::vector<double> x_, y_;
};

// Banded system M u' = -c K u + M f from the rational factorization.
inline SemiLinearSystem<BandedMatrix> make_factorized_system(const DiscretizedProblem& p,
                                                             const FactorizedPower& fp) {
    if (fp.partial_fraction_only || !fp.M || !fp.K)
        throw std::domain_error(
            "make_factorized_system: factorization is partial-fraction only (k too large for the "
            "banded form at this mesh size)");
    SemiLinearSystem<BandedMatrix> sys;
    sys.mass = *fp.M;
    sys.stiff = *fp.K;
    sys.stiff.scale(p.stiffness_scale());
    sys.forcing = p.make_forcing();
    sys.forcing_depends_on_u = p.forcing_depends_on_u();
    sys.forcing_jacobian = p.make_forcing_jacobian();
    sys.initial = p.initial_vector();
    return sys;
}

// Dense matrix-transfer system u' = -c L^beta u + f.
inline SemiLinearSystem<DenseMatrix> make_transfer_system(const DiscretizedProblem& p) {
    SemiLinearSystem<DenseMatrix> sys;
    sys.stiff = frac_power_matrix(p.laplacian(), p.definition().beta());
    sys.stiff.scale(p.stiffness_scale());
    sys.forcing = p.make_forcing();
    sys.forcing_depends_on_u = p.forcing_depends_on_u();
    sys.forcing_jacobian = p.make_forcing_jacobian();
    sys.initial = p.initial_vector();
    return sys;
}

}  // namespace fraclap
