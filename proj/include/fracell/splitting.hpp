#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "fracell/evolution.hpp"
#include "fracell/linsolve.hpp"

namespace fracell {

/// p-component splitting D = sum_i D_i with D_i = A_i - chi_i I, chi_i = theta delta_i.
template <typename Scalar = double>
struct SplittingSetup {
    std::vector<SplitOperator<Scalar>> parts;   // D_i, shifts baked in
    std::vector<Scalar> delta_parts;            // delta_i
    Scalar delta{0};
    Scalar alpha{0.5};
    Scalar theta{1};
    Scalar sigma1{1};
    Scalar sigma2{1};
    int steps{20};

    int p() const { return int(parts.size()); }
    Scalar tau() const { return Scalar(1) / Scalar(steps); }
    const Grid2D<Scalar>& grid() const { return parts.front().grid; }
    /// Theorem-level stability flags: 2 sigma_k >= p.
    bool weights_stable() const {
        return Scalar(2) * sigma1 >= Scalar(p()) && Scalar(2) * sigma2 >= Scalar(p());
    }

    void validate() const {
        if (parts.empty()) throw ValidationError("SplittingSetup: no operator parts");
        if (parts.size() != delta_parts.size()) throw ValidationError("SplittingSetup: delta_i count mismatch");
        if (steps < 1) throw ValidationError("SplittingSetup: steps must be >= 1");
        if (!(alpha > Scalar(0)) || alpha > Scalar(1)) throw ValidationError("SplittingSetup: alpha must lie in (0, 1]");
        if (!(theta > Scalar(0)) || theta > Scalar(1)) throw ValidationError("SplittingSetup: theta must lie in (0, 1]");
        for (const auto& part : parts)
            if (part.grid != grid()) throw ValidationError("SplittingSetup: parts on different grids");
        Scalar chi_sum{0};
        for (const auto& part : parts) chi_sum += part.shift;
        const Scalar target = theta * delta;
        if (std::abs(chi_sum - target) > Scalar(1e-14) * std::max(Scalar(1), std::abs(target)))
            throw ValidationError("SplittingSetup: sum of shifts chi_i != theta*delta");
    }
};

/// Build the setup from the unshifted direction operators A_i.
template <typename Scalar>
SplittingSetup<Scalar> make_splitting_setup(std::vector<SplitOperator<Scalar>> a_parts, std::vector<Scalar> delta_parts,
                                            Scalar alpha, Scalar theta, Scalar sigma1, Scalar sigma2, int steps) {
    SplittingSetup<Scalar> setup;
    setup.delta_parts = std::move(delta_parts);
    setup.delta = Scalar(0);
    for (Scalar d : setup.delta_parts) setup.delta += d;
    setup.alpha = alpha;
    setup.theta = theta;
    setup.sigma1 = sigma1;
    setup.sigma2 = sigma2;
    setup.steps = steps;
    setup.parts.reserve(a_parts.size());
    for (std::size_t i = 0; i < a_parts.size(); ++i)
        setup.parts.push_back(make_shifted(std::move(a_parts[i]), theta * setup.delta_parts[i]));
    warn_if_semidefinite_shift(theta);
    setup.validate();
    return setup;
}

/// The p solution components at two consecutive time levels.
template <typename Scalar = double>
struct VectorState {
    std::vector<GridFunction<Scalar>> current;    // level n
    std::vector<GridFunction<Scalar>> previous;   // level n-1
    int level{0};                                 // n of `current`

    int p() const { return int(current.size()); }
};

/// Explicit starting step: y_i^1 = y^0 - (tau alpha / (theta delta)) D y^0,
/// identical for every component.
template <typename Scalar>
VectorState<Scalar> first_step(const GridFunction<Scalar>& y0, const SplittingSetup<Scalar>& setup) {
    GridFunction<Scalar> dy(y0.grid);
    for (const auto& part : setup.parts) dy.values.noalias() += apply(part, y0).values;
    GridFunction<Scalar> y1 = y0;
    y1.values.noalias() -= (setup.tau() * setup.alpha / (setup.theta * setup.delta)) * dy.values;

    VectorState<Scalar> state;
    state.level = 1;
    state.current.assign(std::size_t(setup.p()), y1);
    state.previous.assign(std::size_t(setup.p()), y0);
    return state;
}

/// One three-level step: components are updated in index order, each solving
///   (theta delta I + (sigma1 t^n + sigma2 tau alpha) D_i) y_i^{n+1} = chi_i^n,
/// where chi_i^n gathers every term already known, including the fresh
/// y_j^{n+1} of components updated earlier in the sweep.
template <typename Scalar>
VectorState<Scalar> splitting_step(const VectorState<Scalar>& state, const SplittingSetup<Scalar>& setup) {
    if (state.level < 1) throw ValidationError("splitting_step: needs levels n and n-1 (run first_step)");
    if (state.p() != setup.p()) throw ValidationError("splitting_step: component count mismatch");
    const Scalar tau = setup.tau();
    const Scalar tn = Scalar(state.level) * tau;
    const Scalar a = setup.theta * setup.delta;
    const Scalar b = setup.sigma1 * tn + setup.sigma2 * tau * setup.alpha;

    std::vector<GridFunction<Scalar>> next(std::size_t(setup.p()));
    GridFunction<Scalar> gather(state.current.front().grid);
    GridFunction<Scalar> rhs(state.current.front().grid);

    for (int i = 0; i < setup.p(); ++i) {
        const GridFunction<Scalar>& yi = state.current[std::size_t(i)];
        const GridFunction<Scalar>& yi_prev = state.previous[std::size_t(i)];

        // diagonal part: t^n D_i [sigma1 y_i^n - (1-sigma1)(y_i^n - y_i^{n-1})] - tau alpha (1-sigma2) D_i y_i^n
        gather.values = (tn * setup.sigma1 - tau * setup.alpha * (Scalar(1) - setup.sigma2)) * yi.values;
        if (setup.sigma1 != Scalar(1))
            gather.values.noalias() -= (tn * (Scalar(1) - setup.sigma1)) * (yi.values - yi_prev.values);
        rhs = apply(setup.parts[std::size_t(i)], gather);
        rhs.values.noalias() += a * yi.values;

        // off-diagonal parts: - D_j [t^n (y_j^hat - y_j^hat_prev) + tau alpha y_j^hat]
        for (int j = 0; j < setup.p(); ++j) {
            if (j == i) continue;
            const bool updated = j < i;
            const GridFunction<Scalar>& yj = updated ? next[std::size_t(j)] : state.current[std::size_t(j)];
            const GridFunction<Scalar>& yj_prev = updated ? state.current[std::size_t(j)] : state.previous[std::size_t(j)];
            gather.values = (tn + tau * setup.alpha) * yj.values - tn * yj_prev.values;
            rhs.values.noalias() -= apply(setup.parts[std::size_t(j)], gather).values;
        }

        const ShiftedLineSystem<Scalar> sys{&setup.parts[std::size_t(i)], a, b};
        next[std::size_t(i)] = thomas_solve_lines(sys, rhs);
    }

    VectorState<Scalar> out;
    out.level = state.level + 1;
    out.current = std::move(next);
    out.previous = state.current;
    return out;
}

/// ||v||^2_C = theta delta sum_i (D_i v_i, v_i).
template <typename Scalar>
Scalar quadratic_form_c(const std::vector<GridFunction<Scalar>>& v, const SplittingSetup<Scalar>& setup) {
    Scalar sum{0};
    for (int i = 0; i < setup.p(); ++i)
        sum += inner_product(apply(setup.parts[std::size_t(i)], v[std::size_t(i)]), v[std::size_t(i)]);
    return setup.theta * setup.delta * sum;
}

/// ||v||^2_A = alpha || sum_j D_j v_j ||^2.
template <typename Scalar>
Scalar quadratic_form_a(const std::vector<GridFunction<Scalar>>& v, const SplittingSetup<Scalar>& setup) {
    GridFunction<Scalar> sum(v.front().grid);
    for (int j = 0; j < setup.p(); ++j) sum.values.noalias() += apply(setup.parts[std::size_t(j)], v[std::size_t(j)]).values;
    const Scalar n = norm_h(sum);
    return setup.alpha * n * n;
}

/// ||v||^2_A0 = alpha sum_i ||D_i v_i||^2.
template <typename Scalar>
Scalar quadratic_form_a0(const std::vector<GridFunction<Scalar>>& v, const SplittingSetup<Scalar>& setup) {
    Scalar sum{0};
    for (int i = 0; i < setup.p(); ++i) {
        const Scalar n = norm_h(apply(setup.parts[std::size_t(i)], v[std::size_t(i)]));
        sum += n * n;
    }
    return setup.alpha * sum;
}

/// ||w||^2 in the seminorm R^n - (tau^2/4) A with
/// R^n = (tau/2) C + sigma1 tau (t^n/alpha) A0 - (tau/2)(t^n/alpha) A + sigma2 (tau^2/2) A0.
/// Values inside the roundoff floor are clamped to zero.
template <typename Scalar>
Scalar energy_seminorm_sq(const std::vector<GridFunction<Scalar>>& w, const SplittingSetup<Scalar>& setup, int n) {
    const Scalar tau = setup.tau();
    const Scalar tn = Scalar(n) * tau;
    const Scalar fc = quadratic_form_c(w, setup);
    const Scalar fa = quadratic_form_a(w, setup);
    const Scalar fa0 = quadratic_form_a0(w, setup);
    const Scalar c1 = tau / Scalar(2);
    const Scalar c2 = setup.sigma1 * tau * tn / setup.alpha + setup.sigma2 * tau * tau / Scalar(2);
    const Scalar c3 = (tau / Scalar(2)) * (tn / setup.alpha) + tau * tau / Scalar(4);
    const Scalar value = c1 * fc + c2 * fa0 - c3 * fa;
    if (value >= Scalar(0)) return value;
    const Scalar scale = std::abs(c1 * fc) + std::abs(c2 * fa0) + std::abs(c3 * fa);
    if (-value <= Scalar(64) * std::numeric_limits<Scalar>::epsilon() * scale) return Scalar(0);
    return value;   // genuinely negative; callers treat as a violated weight condition
}

/// The two sides of the per-step energy estimate at step n, both measured with
/// the same R^n:
///   E = || (y' + y)/2 ||^2_A + || (y' - y)/tau ||^2_{R^n - (tau^2/4) A}.
template <typename Scalar>
std::pair<Scalar, Scalar> energy_theorem2(const std::vector<GridFunction<Scalar>>& y_next,
                                          const std::vector<GridFunction<Scalar>>& y_cur,
                                          const std::vector<GridFunction<Scalar>>& y_prev, int n,
                                          const SplittingSetup<Scalar>& setup) {
    const Scalar tau = setup.tau();
    const std::size_t p = std::size_t(setup.p());
    std::vector<GridFunction<Scalar>> v(p), w(p);
    auto energy = [&](const std::vector<GridFunction<Scalar>>& hi, const std::vector<GridFunction<Scalar>>& lo) {
        for (std::size_t i = 0; i < p; ++i) {
            v[i] = hi[i];
            v[i].values = (hi[i].values + lo[i].values) / Scalar(2);
            w[i] = hi[i];
            w[i].values = (hi[i].values - lo[i].values) / tau;
        }
        return quadratic_form_a(v, setup) + energy_seminorm_sq(w, setup, n);
    };
    const Scalar e_plus = energy(y_next, y_cur);
    const Scalar e_minus = energy(y_cur, y_prev);
    return {e_plus, e_minus};
}

template <typename Scalar = double>
struct SplittingResult {
    VectorState<Scalar> state;                      // final, level N
    std::vector<std::array<Scalar, 2>> energies;    // (E_plus, E_minus) for steps n = 1..N-1
};

/// Full run: initial state, explicit first step, then N-1 three-level steps,
/// with the per-step energy pair recorded for diagnostics.
template <typename Scalar>
SplittingResult<Scalar> run_splitting(const GridFunction<Scalar>& f, const SplittingSetup<Scalar>& setup,
                                      bool record_energies = true) {
    setup.validate();
    SplittingResult<Scalar> result;
    const GridFunction<Scalar> y0 = initial_state(f, setup.theta, setup.delta, setup.alpha);
    VectorState<Scalar> state = first_step(y0, setup);
    if (record_energies) result.energies.reserve(std::size_t(std::max(0, setup.steps - 1)));
    for (int n = 1; n < setup.steps; ++n) {
        VectorState<Scalar> next = splitting_step(state, setup);
        if (record_energies) {
            const auto [ep, em] = energy_theorem2(next.current, state.current, state.previous, n, setup);
            result.energies.push_back({ep, em});
        }
        state = std::move(next);
    }
    result.state = std::move(state);
    return result;
}

}  // namespace fracell
