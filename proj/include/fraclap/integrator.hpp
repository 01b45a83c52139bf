#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fraclap/errors.hpp"

namespace fraclap {

using ForcingFn = std::function<std::vector<double>(double t, std::span<const double> u)>;
using JacobianDiagFn = std::function<std::vector<double>(double t, std::span<const double> u)>;

// Semi-discrete system  mass * du/dt = -stiff * u + mass * f(t, u).
// An empty mass means the identity (the matrix-transfer path). The stiff
// operator carries the kappa/h^alpha scaling.
template <class Matrix>
struct SemiLinearSystem {
    std::optional<Matrix> mass;
    Matrix stiff;
    ForcingFn forcing;                  // empty: f = 0
    bool forcing_depends_on_u = false;
    JacobianDiagFn forcing_jacobian;    // optional diagonal of df/du
    std::vector<double> initial;
    double t0 = 0.0;

    std::size_t size() const { return stiff.rows(); }
    const Matrix* mass_ptr() const { return mass ? &*mass : nullptr; }

    void mass_apply(std::span<const double> x, std::span<double> y) const {
        if (mass)
            mass->apply(x, y);
        else
            std::copy(x.begin(), x.end(), y.begin());
    }
};

struct StepperConfig {
    double theta = 0.5;        // in [1/2, 1]; 1/2 trapezoidal, 1 implicit Euler
    double dt = 0.0;           // > 0: fixed step; <= 0: adaptive step-halving control
    double rel_tol = 1e-6;
    double abs_tol = 1e-10;
    int max_newton = 12;
    double dt_initial = 0.0;   // adaptive initial step; <= 0 picks (t_end-t0)*1e-3
    double dt_min = 1e-12;

    void validate() const {
        if (!(theta >= 0.5) || !(theta <= 1.0))
            throw std::domain_error("StepperConfig: theta must lie in [1/2, 1]");
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw std::domain_error("StepperConfig: tolerances must be positive");
        if (max_newton < 1) throw std::domain_error("StepperConfig: max_newton must be >= 1");
    }

    int order() const { return theta == 0.5 ? 2 : 1; }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
};

namespace detail {

inline double norm_inf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace detail

// One-parameter implicit stepper for SemiLinearSystem. A step solves
//   (M + theta dt S) u+ = (M - (1-theta) dt S) u
//                       + dt M [theta f(t+dt, u+) + (1-theta) f(t, u)],
// one linear solve when f is u-independent, Newton iteration otherwise.
// Stage factorizations are cached per step size; the adaptive driver reuses a
// cached step size as long as the proposed one stays within 20% of it.
template <class Matrix>
class ThetaStepper {
public:
    using Factor = decltype(factorize(std::declval<const Matrix&>()));

    ThetaStepper(const SemiLinearSystem<Matrix>& sys, const StepperConfig& cfg)
        : sys_(sys), cfg_(cfg) {
        cfg_.validate();
    }

    struct StepResult {
        std::vector<double> u;
        int newton_iterations = 0;
        bool converged = true;
    };

    // The step is computed in increment form: with W = M + theta dt S,
    //   W (u+ - u) = dt [ -S u + M (theta f(t+dt, u+) + (1-theta) f(t, u)) ],
    // algebraically identical to the theta update but with a right-hand side
    // of size O(dt), which keeps the solve noise proportional to the increment
    // (the assembled M, K can be very ill-conditioned for larger k).
    StepResult step(std::span<const double> u, double t, double dt) {
        if (!(dt > 0.0)) throw std::domain_error("step: dt must be positive");
        const std::size_t n = sys_.size();
        const double theta = cfg_.theta;

        // rhs = dt * (-S u + (1-theta) M f(t,u)), the explicit part
        std::vector<double> rhs(n), work(n);
        sys_.stiff.apply(u, rhs);
        for (double& v : rhs) v = -v;
        if (sys_.forcing && theta < 1.0) {
            const std::vector<double> f0 = sys_.forcing(t, u);
            sys_.mass_apply(f0, work);
            for (std::size_t i = 0; i < n; ++i) rhs[i] += (1.0 - theta) * work[i];
        }

        StepResult res;
        if (!sys_.forcing || !sys_.forcing_depends_on_u) {
            if (sys_.forcing) {
                const std::vector<double> f1 = sys_.forcing(t + dt, u);
                sys_.mass_apply(f1, work);
                for (std::size_t i = 0; i < n; ++i) rhs[i] += theta * work[i];
            }
            for (double& v : rhs) v *= dt;
            const Entry& entry = stage_entry(dt, u, t, /*with_jacobian=*/false);
            const std::vector<double> incr = refined_solve(entry, rhs);
            res.u.assign(u.begin(), u.end());
            for (std::size_t i = 0; i < n; ++i) res.u[i] += incr[i];
            return res;
        }
        for (double& v : rhs) v *= dt;
        return newton_solve(u, t, dt, rhs);
    }

    void invalidate_cache() { cache_.clear(); }

private:
    struct Entry {
        double dt = -1.0;
        bool with_jacobian = false;
        std::optional<Matrix> W;        // stage matrix, kept for Newton residuals
        std::optional<Factor> factor;   // factor of W, or of the frozen Jacobian
    };

    const Entry& stage_entry(double dt, std::span<const double> u, double t, bool with_jacobian) {
        for (const Entry& e : cache_)
            if (e.dt == dt && e.with_jacobian == with_jacobian) return e;
        Entry e;
        e.dt = dt;
        e.with_jacobian = with_jacobian;
        Matrix W = stage_matrix(sys_.mass_ptr(), cfg_.theta * dt, sys_.stiff);
        e.W = W;  // kept for iterative refinement / Newton residuals
        if (with_jacobian) {
            std::vector<double> d = jacobian_diag(t, u);
            for (double& v : d) v *= cfg_.theta * dt;
            subtract_mass_column_scaled(W, sys_.mass_ptr(), d);
        }
        e.factor.emplace(factorize(W));
        if (cache_.size() >= 4) cache_.erase(cache_.begin());
        cache_.push_back(std::move(e));
        return cache_.back();
    }

    // Direct solve plus two passes of iterative refinement against the kept
    // stage matrix. The assembled W can be severely ill-conditioned for
    // larger k; refinement recovers the digits the single elimination loses.
    std::vector<double> refined_solve(const Entry& e, const std::vector<double>& rhs) const {
        std::vector<double> x = rhs;
        e.factor->solve_in_place(x);
        std::vector<double> r(rhs.size());
        for (int pass = 0; pass < 2; ++pass) {
            e.W->apply(x, r);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
            e.factor->solve_in_place(r);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += r[i];
        }
        return x;
    }

    std::vector<double> jacobian_diag(double t, std::span<const double> u) const {
        if (sys_.forcing_jacobian) return sys_.forcing_jacobian(t, u);
        // one-shot finite difference; valid for forcings acting pointwise in u
        const std::size_t n = sys_.size();
        const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
        std::vector<double> up(u.begin(), u.end()), d(n);
        std::vector<double> eps(n);
        for (std::size_t i = 0; i < n; ++i) {
            eps[i] = sqrt_eps * (1.0 + std::abs(u[i]));
            up[i] += eps[i];
        }
        const std::vector<double> f1 = sys_.forcing(t, up);
        const std::vector<double> f0 = sys_.forcing(t, u);
        for (std::size_t i = 0; i < n; ++i) d[i] = (f1[i] - f0[i]) / eps[i];
        return d;
    }

    // Newton iteration on the increment w = u+ - u:
    //   G(w) = W w - rhs_explicit - dt theta M f(t+dt, u+w) = 0.
    StepResult newton_solve(std::span<const double> u, double t, double dt,
                            const std::vector<double>& rhs_explicit) {
        const std::size_t n = sys_.size();
        const double theta = cfg_.theta;
        const Entry& entry = stage_entry(dt, u, t, /*with_jacobian=*/true);

        StepResult res;
        std::vector<double> w(n, 0.0), v(u.begin(), u.end());
        std::vector<double> G(n), work(n), fwork(n);

        auto residual = [&](std::span<const double> ww, std::span<const double> vv,
                            std::vector<double>& out) {
            entry.W->apply(ww, out);
            const std::vector<double> fv = sys_.forcing(t + dt, vv);
            sys_.mass_apply(fv, fwork);
            for (std::size_t i = 0; i < n; ++i) out[i] -= dt * theta * fwork[i] + rhs_explicit[i];
        };

        double res_scale = detail::norm_inf(rhs_explicit);
        for (int m = 1; m <= cfg_.max_newton; ++m) {
            residual(w, v, G);
            res_scale = std::max({res_scale, detail::norm_inf(G), 1e-300});
            for (double& g : G) g = -g;
            entry.factor->solve_in_place(G);  // Newton update of the increment
            const double dn = detail::norm_inf(G);
            for (std::size_t i = 0; i < n; ++i) {
                w[i] += G[i];
                v[i] = u[i] + w[i];
            }
            const double wtol = cfg_.abs_tol + cfg_.rel_tol * detail::norm_inf(v);
            bool done = dn <= wtol;
            if (!done) {
                residual(w, v, G);
                done = detail::norm_inf(G) <= 1e-12 * res_scale;
            }
            if (done) {
                res.u = std::move(v);
                res.newton_iterations = m;
                return res;
            }
        }
        res.converged = false;
        res.newton_iterations = cfg_.max_newton;
        return res;
    }

    const SemiLinearSystem<Matrix>& sys_;
    StepperConfig cfg_;
    std::vector<Entry> cache_;
};

// Single theta step as a free operation.
template <class Matrix>
typename ThetaStepper<Matrix>::StepResult step(const SemiLinearSystem<Matrix>& sys,
                                               std::span<const double> u, double t, double dt,
                                               const StepperConfig& cfg = {}) {
    ThetaStepper<Matrix> stepper(sys, cfg);
    return stepper.step(u, t, dt);
}

// Advance the system to t_end, recording the state at each requested snapshot
// time (stepping lands on snapshots exactly). Fixed-step mode when cfg.dt > 0;
// otherwise local error is controlled by comparing each step against two half
// steps, the half-step result being the one propagated.
template <class Matrix>
Trajectory integrate(const SemiLinearSystem<Matrix>& sys, double t_end, const StepperConfig& cfg,
                     std::span<const double> snapshots) {
    cfg.validate();
    const double t0 = sys.t0;
    if (t_end < t0) throw std::domain_error("integrate: t_end before t0");
    std::vector<double> snap(snapshots.begin(), snapshots.end());
    std::sort(snap.begin(), snap.end());
    snap.erase(std::unique(snap.begin(), snap.end()), snap.end());
    const double snap_eps = 1e-12 * std::max({1.0, std::abs(t0), std::abs(t_end)});
    for (double& s : snap) {
        if (s >= t0 - snap_eps && s < t0) s = t0;
        if (s <= t_end + snap_eps && s > t_end) s = t_end;
        if (s < t0 || s > t_end) throw std::domain_error("integrate: snapshot outside [t0, t_end]");
    }

    Trajectory traj;
    std::vector<double> u = sys.initial;
    double t = t0;
    std::size_t next_snap = 0;
    auto record_if_snapshot = [&](double tt) {
        while (next_snap < snap.size() && std::abs(snap[next_snap] - tt) <=
                                              1e-12 * std::max(1.0, std::abs(tt))) {
            traj.times.push_back(snap[next_snap]);
            traj.states.push_back(u);
            ++next_snap;
        }
    };
    record_if_snapshot(t0);
    if (t_end == t0) return traj;

    ThetaStepper<Matrix> stepper(sys, cfg);
    const bool fixed = cfg.dt > 0.0;
    const int p = cfg.order();
    double dt_ctrl = fixed ? cfg.dt : (cfg.dt_initial > 0.0 ? cfg.dt_initial : (t_end - t0) * 1e-3);
    double dt_quantized = 0.0;  // step size whose factorization is cached

    const double t_eps = 1e-12 * std::max(1.0, std::abs(t_end));
    while (t < t_end - t_eps) {
        const double next_event = next_snap < snap.size() ? snap[next_snap] : t_end;
        double dt = std::min(dt_ctrl, next_event - t);
        bool clipped = dt < dt_ctrl * (1.0 - 1e-12);
        if (!fixed && !clipped && dt_quantized > 0.0 &&
            std::abs(dt - dt_quantized) <= 0.2 * dt_quantized && t + dt_quantized <= next_event + t_eps) {
            dt = dt_quantized;  // reuse the cached factorization
            clipped = false;
        }

        auto full = stepper.step(u, t, dt);
        if (fixed) {
            if (!full.converged)
                throw NumericalError("integrate: Newton failed at t=" + std::to_string(t) +
                                     " with fixed dt=" + std::to_string(dt));
            u = std::move(full.u);
            t += dt;
            record_if_snapshot(t);
            continue;
        }

        bool accept = false;
        bool newton_failed = !full.converged;
        double err_ratio = 0.0;
        if (full.converged) {
            auto h1 = stepper.step(u, t, dt / 2.0);
            newton_failed = !h1.converged;
            if (h1.converged) {
                auto h2 = stepper.step(h1.u, t + dt / 2.0, dt / 2.0);
                newton_failed = !h2.converged;
                if (h2.converged) {
                    double err = 0.0;
                    for (std::size_t i = 0; i < u.size(); ++i)
                        err = std::max(err, std::abs(full.u[i] - h2.u[i]));
                    err /= double((1 << p) - 1);
                    const double scale =
                        cfg.abs_tol + cfg.rel_tol * std::max(detail::norm_inf(u), detail::norm_inf(h2.u));
                    err_ratio = err / scale;
                    if (err_ratio <= 1.0) {
                        accept = true;
                        u = std::move(h2.u);
                        t += dt;
                        record_if_snapshot(t);
                    }
                }
            }
        }

        double factor;
        if (newton_failed)
            factor = 0.25;
        else if (err_ratio == 0.0)
            factor = 4.0;
        else
            factor = std::clamp(0.9 * std::pow(err_ratio, -1.0 / double(p + 1)), 0.2, 4.0);
        if (!accept) factor = std::min(factor, 0.5);
        const double dt_new = dt * factor;
        if (!accept && dt_new < cfg.dt_min)
            throw NumericalError("integrate: step size underflow at t=" + std::to_string(t) +
                                 " (dt=" + std::to_string(dt_new) + ", err_ratio=" +
                                 std::to_string(err_ratio) + ")");
        if (!clipped || !accept) dt_ctrl = dt_new;
        if (accept && !clipped) dt_quantized = dt;
    }
    record_if_snapshot(t_end);
    return traj;
}

// Per-snapshot max-norm differences of two trajectories on the same grid.
inline std::vector<std::pair<double, double>> step_by_step_difference(const Trajectory& a,
                                                                      const Trajectory& b) {
    if (a.times.size() != b.times.size())
        throw std::domain_error("step_by_step_difference: snapshot grids differ in length");
    std::vector<std::pair<double, double>> out;
    out.reserve(a.times.size());
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        if (std::abs(a.times[i] - b.times[i]) > 1e-12 * std::max(1.0, std::abs(a.times[i])))
            throw std::domain_error("step_by_step_difference: snapshot grids do not match");
        if (a.states[i].size() != b.states[i].size())
            throw std::domain_error("step_by_step_difference: state dimensions do not match");
        double m = 0.0;
        for (std::size_t j = 0; j < a.states[i].size(); ++j)
            m = std::max(m, std::abs(a.states[i][j] - b.states[i][j]));
        out.emplace_back(a.times[i], m);
    }
    return out;
}

}  // namespace fraclap
