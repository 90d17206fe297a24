#pragma once

#include <cmath>
#include <vector>

#include "fracell/linsolve.hpp"

namespace fracell {

/// Parameters of the implicit two-level weighted scheme in pseudo-time.
/// tau = 1/steps is always derived, never stored.
template <typename Scalar = double>
struct SchemeConfig {
    Scalar alpha{0.5};
    Scalar theta{1};
    Scalar sigma{1};
    int steps{20};
    Scalar solver_tol{1e-12};

    Scalar tau() const { return Scalar(1) / Scalar(steps); }
    /// sigma >= 1/2 marks the unconditionally stable regime.
    bool unconditionally_stable() const { return sigma >= Scalar(0.5); }

    void validate() const {
        if (steps < 1) throw ValidationError("SchemeConfig: steps must be >= 1");
        if (!(alpha > Scalar(0)) || alpha > Scalar(1)) throw ValidationError("SchemeConfig: alpha must lie in (0, 1]");
        if (!(theta > Scalar(0)) || theta > Scalar(1)) throw ValidationError("SchemeConfig: theta must lie in (0, 1]");
        if (!(solver_tol > Scalar(0))) throw ValidationError("SchemeConfig: solver tolerance must be positive");
    }
};

/// y(0) = (theta delta)^-alpha f.
template <typename Scalar>
GridFunction<Scalar> initial_state(const GridFunction<Scalar>& f, Scalar theta, Scalar delta, Scalar alpha) {
    using std::exp;
    using std::log;
    if (!(theta * delta > Scalar(0))) throw ValidationError("initial_state: theta*delta must be positive");
    GridFunction<Scalar> y = f;
    y.values *= exp(-alpha * log(theta * delta));
    return y;
}

/// One implicit step: with t_s = sigma t^{n+1} + (1-sigma) t^n,
///   [theta delta I + (t_s + alpha tau sigma) D] y^{n+1}
///     = [theta delta I + (t_s - alpha tau (1-sigma)) D] y^n.
/// Solved by preconditioned CG warm-started from y^n.
template <typename Scalar>
GridFunction<Scalar> two_level_step(const GridFunction<Scalar>& y, int n, const SchemeConfig<Scalar>& cfg,
                                    const FullOperator<Scalar>& d_op, Scalar delta) {
    const Scalar tau = cfg.tau();
    const Scalar t_sigma = (Scalar(n) + cfg.sigma) * tau;
    const Scalar b_new = t_sigma + cfg.alpha * tau * cfg.sigma;
    const Scalar b_old = t_sigma - cfg.alpha * tau * (Scalar(1) - cfg.sigma);
    const Scalar a = cfg.theta * delta;

    GridFunction<Scalar> rhs = apply(d_op, y);
    rhs.values *= b_old;
    rhs.values.noalias() += a * y.values;

    const ShiftedOperator<Scalar> lhs{&d_op, a, b_new};
    return spd_solve(lhs, rhs, cfg.solver_tol, &y);
}

template <typename Scalar = double>
struct TwoLevelResult {
    GridFunction<Scalar> y;                 // y^N, the approximation of w
    std::vector<Scalar> norm_history;       // ||y^n|| for n = 0..N
    std::vector<Scalar> energy_history;     // ||y^n||_D for n = 0..N
};

/// Integrate the pseudo-parabolic problem from t = 0 to t = 1 with N steps of
/// the two-level scheme, recording the norm histories at every level.
template <typename Scalar>
TwoLevelResult<Scalar> run_two_level(const GridFunction<Scalar>& f, const SchemeConfig<Scalar>& cfg,
                                     const FullOperator<Scalar>& d_op, Scalar delta) {
    cfg.validate();
    TwoLevelResult<Scalar> result;
    result.norm_history.reserve(std::size_t(cfg.steps) + 1);
    result.energy_history.reserve(std::size_t(cfg.steps) + 1);

    GridFunction<Scalar> y = initial_state(f, cfg.theta, delta, cfg.alpha);
    result.norm_history.push_back(norm_h(y));
    result.energy_history.push_back(norm_energy(y, d_op));
    for (int n = 0; n < cfg.steps; ++n) {
        y = two_level_step(y, n, cfg, d_op, delta);
        result.norm_history.push_back(norm_h(y));
        result.energy_history.push_back(norm_energy(y, d_op));
    }
    result.y = std::move(y);
    return result;
}

}  // namespace fracell
