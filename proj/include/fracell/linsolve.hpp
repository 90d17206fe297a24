#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>

#include "fracell/operators.hpp"

namespace fracell {

/// add*I + scale*base, solved line-by-line (each line is tridiagonal).
template <typename Scalar = double>
struct ShiftedLineSystem {
    const SplitOperator<Scalar>* base{nullptr};
    Scalar add{0};
    Scalar scale{1};
};

/// Thomas elimination over all lines of the system's direction. No pivoting;
/// a pivot-magnitude guard protects the diagonal-dominance assumption.
template <typename Scalar>
GridFunction<Scalar> thomas_solve_lines(const ShiftedLineSystem<Scalar>& sys, const GridFunction<Scalar>& rhs) {
    const SplitOperator<Scalar>& op = *sys.base;
    if (rhs.grid != op.grid) throw ValidationError("thomas_solve_lines: grid mismatch");

    GridFunction<Scalar> x(rhs.grid);
    const int n = op.line_length();
    const int lines = op.line_count();
    Eigen::VectorX<Scalar> scratch_diag(n), scratch_rhs(n);

    const Scalar pivot_floor = std::numeric_limits<Scalar>::min() / std::numeric_limits<Scalar>::epsilon();
    auto rm = rhs.mat();
    auto xm = x.mat();

    for (int line = 0; line < lines; ++line) {
        auto entry = [&](const Eigen::MatrixX<Scalar>& m, int i) -> Scalar {
            return op.direction == 1 ? m(i, line) : m(line, i);
        };
        // forward elimination
        Scalar piv = sys.add + sys.scale * (entry(op.diag, 0) - op.shift);
        if (std::abs(piv) <= pivot_floor)
            throw SolverError("thomas_solve_lines: zero pivot in direction " + std::to_string(op.direction) +
                              ", line " + std::to_string(line) + ", row 0");
        scratch_diag[0] = piv;
        scratch_rhs[0] = (op.direction == 1 ? rm(0, line) : rm(line, 0));
        for (int i = 1; i < n; ++i) {
            const Scalar sub = sys.scale * entry(op.lower, i);
            const Scalar sup_prev = sys.scale * entry(op.upper, i - 1);
            const Scalar m = sub / scratch_diag[i - 1];
            piv = sys.add + sys.scale * (entry(op.diag, i) - op.shift) - m * sup_prev;
            if (std::abs(piv) <= pivot_floor)
                throw SolverError("thomas_solve_lines: zero pivot in direction " + std::to_string(op.direction) +
                                  ", line " + std::to_string(line) + ", row " + std::to_string(i));
            scratch_diag[i] = piv;
            const Scalar b = (op.direction == 1 ? rm(i, line) : rm(line, i));
            scratch_rhs[i] = b - m * scratch_rhs[i - 1];
        }
        // back substitution
        Scalar xi = scratch_rhs[n - 1] / scratch_diag[n - 1];
        (op.direction == 1 ? xm(n - 1, line) : xm(line, n - 1)) = xi;
        for (int i = n - 2; i >= 0; --i) {
            const Scalar sup = sys.scale * entry(op.upper, i);
            xi = (scratch_rhs[i] - sup * xi) / scratch_diag[i];
            (op.direction == 1 ? xm(i, line) : xm(line, i)) = xi;
        }
    }
    return x;
}

/// add*I + scale*base for the full 2-D operator.
template <typename Scalar = double>
struct ShiftedOperator {
    const FullOperator<Scalar>* base{nullptr};
    Scalar add{0};
    Scalar scale{1};

    Eigen::MatrixX<Scalar> diagonal() const {
        return (scale * base->diagonal().array() + add).matrix();
    }
};

template <typename Scalar>
GridFunction<Scalar> apply(const ShiftedOperator<Scalar>& op, const GridFunction<Scalar>& y) {
    GridFunction<Scalar> out = apply(*op.base, y);
    out.values *= op.scale;
    out.values.noalias() += op.add * y.values;
    return out;
}

/// Jacobi-preconditioned conjugate gradients. Deterministic for fixed inputs;
/// stops at relative residual <= tol, throws after 10*M iterations.
template <typename Scalar>
GridFunction<Scalar> spd_solve(const ShiftedOperator<Scalar>& op, const GridFunction<Scalar>& rhs, Scalar tol,
                               const GridFunction<std::type_identity_t<Scalar>>* initial_guess = nullptr,
                               long* iterations_out = nullptr) {
    using Vector = Eigen::VectorX<Scalar>;
    using std::sqrt;
    const Grid2D<Scalar>& g = rhs.grid;
    if (op.base->grid() != g) throw ValidationError("spd_solve: grid mismatch");
    if (!(op.add > Scalar(0)) || op.scale < Scalar(0)) throw ValidationError("spd_solve: need add > 0 and scale >= 0");

    const Eigen::MatrixX<Scalar> diag_mat = op.diagonal();
    Vector inv_diag = Eigen::Map<const Vector>(diag_mat.data(), diag_mat.size());
    if ((inv_diag.array() <= Scalar(0)).any()) throw SolverError("spd_solve: non-positive diagonal entry");
    inv_diag = inv_diag.cwiseInverse();

    GridFunction<Scalar> x = initial_guess ? *initial_guess : GridFunction<Scalar>(g);
    if (initial_guess) require_same_grid(*initial_guess, rhs, "spd_solve");

    const Scalar rhs_norm = rhs.values.norm();
    if (rhs_norm == Scalar(0)) {
        if (iterations_out) *iterations_out = 0;
        return GridFunction<Scalar>(g);
    }
    const Scalar target = tol * rhs_norm;

    Vector r = rhs.values - apply(op, x).values;
    Vector z = inv_diag.cwiseProduct(r);
    Vector p = z;
    Scalar rz = r.dot(z);
    GridFunction<Scalar> pw(g), apw(g);

    const long max_iter = 10 * g.size();
    long it = 0;
    Scalar res = r.norm();
    while (res > target) {
        if (++it > max_iter)
            throw SolverError("spd_solve: no convergence after " + std::to_string(max_iter) +
                              " iterations (residual " + std::to_string(double(res / rhs_norm)) + " relative)");
        pw.values = p;
        apw = apply(op, pw);
        const Scalar alpha = rz / p.dot(apw.values);
        x.values.noalias() += alpha * p;
        r.noalias() -= alpha * apw.values;
        res = r.norm();
        if (res <= target) break;
        z = inv_diag.cwiseProduct(r);
        const Scalar rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    if (iterations_out) *iterations_out = it;
    return x;
}

}  // namespace fracell
