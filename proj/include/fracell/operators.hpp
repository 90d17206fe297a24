#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <string>

#include "fracell/grid.hpp"

namespace fracell {

/// Diffusion coefficient sampled at edge midpoints, reaction coefficient at
/// interior nodes. k_lower is a certified lower bound of k over the domain.
template <typename Scalar = double>
struct CoefficientField {
    using Matrix = Eigen::MatrixX<Scalar>;

    Grid2D<Scalar> grid;
    Matrix k_mid1;   // N1 x (N2-1): k((i1-1/2)h1, i2 h2), i1 = 1..N1
    Matrix k_mid2;   // (N1-1) x N2: k(i1 h1, (i2-1/2)h2), i2 = 1..N2
    Matrix c_node;   // (N1-1) x (N2-1)
    Scalar k_lower{1};

    template <typename KFn, typename CFn>
    static CoefficientField sample(const Grid2D<Scalar>& g, KFn&& k, CFn&& c, Scalar k_lower_bound) {
        CoefficientField out;
        out.grid = g;
        out.k_lower = k_lower_bound;
        out.k_mid1.resize(g.n1, g.cols());
        out.k_mid2.resize(g.rows(), g.n2);
        out.c_node.resize(g.rows(), g.cols());
        const Scalar h1 = g.h1(), h2 = g.h2();
        for (int i2 = 1; i2 <= g.cols(); ++i2)
            for (int i1 = 1; i1 <= g.n1; ++i1)
                out.k_mid1(i1 - 1, i2 - 1) = k((Scalar(i1) - Scalar(0.5)) * h1, g.x2(i2));
        for (int i2 = 1; i2 <= g.n2; ++i2)
            for (int i1 = 1; i1 <= g.rows(); ++i1)
                out.k_mid2(i1 - 1, i2 - 1) = k(g.x1(i1), (Scalar(i2) - Scalar(0.5)) * h2);
        for (int i2 = 1; i2 <= g.cols(); ++i2)
            for (int i1 = 1; i1 <= g.rows(); ++i1) out.c_node(i1 - 1, i2 - 1) = c(g.x1(i1), g.x2(i2));
        out.validate();
        return out;
    }

    static CoefficientField constant(const Grid2D<Scalar>& g, Scalar k_value, Scalar c_value) {
        return sample(
            g, [k_value](Scalar, Scalar) { return k_value; }, [c_value](Scalar, Scalar) { return c_value; },
            k_value);
    }

    void validate() const {
        if (!(k_lower > Scalar(0))) throw ValidationError("CoefficientField: k lower bound must be positive");
        if ((k_mid1.array() < k_lower).any() || (k_mid2.array() < k_lower).any())
            throw ValidationError("CoefficientField: k sample below certified lower bound");
        if ((c_node.array() < Scalar(0)).any()) throw ValidationError("CoefficientField: c must be nonnegative");
    }
};

/// Direction-wise second-difference operator, tridiagonal along every grid
/// line of its direction. `shift` is the scalar subtracted from the diagonal,
/// so the operator acts as (stencil - shift*I).
template <typename Scalar = double>
struct SplitOperator {
    using Matrix = Eigen::MatrixX<Scalar>;

    int direction{1};  // 1 or 2
    Grid2D<Scalar> grid;
    Matrix lower, diag, upper;   // grid layout; lower/upper entries at line ends are zero
    Scalar shift{0};

    int line_count() const { return direction == 1 ? grid.cols() : grid.rows(); }
    int line_length() const { return direction == 1 ? grid.rows() : grid.cols(); }
};

/// Stencil rows per direction: interior
///   (1/h^2) [-k_w y(x-h) + (k_w + k_e) y(x) - k_e y(x+h)] + (c/2) y(x)
/// with the out-of-domain neighbour term dropped next to the boundary (its
/// coefficient stays on the diagonal). c is split evenly between the two
/// direction operators so that A1 + A2 carries c exactly once.
template <typename Scalar>
SplitOperator<Scalar> assemble_direction_operator(const Grid2D<Scalar>& grid, const CoefficientField<Scalar>& coeff,
                                                  int direction) {
    if (direction != 1 && direction != 2) throw ValidationError("assemble_direction_operator: direction must be 1 or 2");
    if (coeff.grid != grid) throw ValidationError("assemble_direction_operator: coefficient field on a different grid");

    SplitOperator<Scalar> op;
    op.direction = direction;
    op.grid = grid;
    const int r = grid.rows(), c = grid.cols();
    op.lower.setZero(r, c);
    op.diag.setZero(r, c);
    op.upper.setZero(r, c);

    if (direction == 1) {
        const Scalar ih2 = Scalar(1) / (grid.h1() * grid.h1());
        for (int j = 0; j < c; ++j) {
            for (int i = 0; i < r; ++i) {
                const Scalar kw = coeff.k_mid1(i, j);      // k at x1 - h1/2
                const Scalar ke = coeff.k_mid1(i + 1, j);  // k at x1 + h1/2
                op.diag(i, j) = (kw + ke) * ih2 + Scalar(0.5) * coeff.c_node(i, j);
                if (i > 0) op.lower(i, j) = -kw * ih2;
                if (i < r - 1) op.upper(i, j) = -ke * ih2;
            }
        }
    } else {
        const Scalar ih2 = Scalar(1) / (grid.h2() * grid.h2());
        for (int j = 0; j < c; ++j) {
            for (int i = 0; i < r; ++i) {
                const Scalar ks = coeff.k_mid2(i, j);      // k at x2 - h2/2
                const Scalar kn = coeff.k_mid2(i, j + 1);  // k at x2 + h2/2
                op.diag(i, j) = (ks + kn) * ih2 + Scalar(0.5) * coeff.c_node(i, j);
                if (j > 0) op.lower(i, j) = -ks * ih2;
                if (j < c - 1) op.upper(i, j) = -kn * ih2;
            }
        }
    }
    return op;
}

/// Certified spectral lower bound delta_k = k_lower * (4/h_k^2) sin^2(pi/(2 N_k)).
template <typename Scalar>
Scalar spectral_lower_bound(const Grid2D<Scalar>& grid, const CoefficientField<Scalar>& coeff, int direction) {
    using std::sin;
    if (direction != 1 && direction != 2) throw ValidationError("spectral_lower_bound: direction must be 1 or 2");
    const Scalar h = direction == 1 ? grid.h1() : grid.h2();
    const int n = direction == 1 ? grid.n1 : grid.n2;
    const Scalar s = sin(Scalar(EIGEN_PI) / (Scalar(2) * Scalar(n)));
    return coeff.k_lower * Scalar(4) / (h * h) * s * s;
}

template <typename Scalar>
SplitOperator<Scalar> make_shifted(const SplitOperator<Scalar>& op, Scalar chi) {
    SplitOperator<Scalar> out = op;
    out.shift += chi;
    return out;
}

/// theta = 1 shifts by the full certified bound, leaving the shifted operator
/// only positive semidefinite. Accepted, but flagged once per process.
template <typename Scalar>
void warn_if_semidefinite_shift(Scalar theta) {
    static bool warned = false;
    if (theta >= Scalar(1) && !warned) {
        warned = true;
        std::fputs("fracell: theta = 1 makes the shifted operator only positive semidefinite\n", stderr);
    }
}

namespace detail {

// out (+)= (stencil - shift*I) applied to y, on matrix views.
template <typename Scalar, typename In, typename Out>
void apply_split_add(const SplitOperator<Scalar>& op, const In& y, Out&& out, bool accumulate) {
    const int r = op.grid.rows(), c = op.grid.cols();
    if (accumulate)
        out.noalias() += (op.diag.array() - op.shift).matrix().cwiseProduct(y);
    else
        out.noalias() = (op.diag.array() - op.shift).matrix().cwiseProduct(y);
    if (op.direction == 1) {
        if (r > 1) {
            out.bottomRows(r - 1).noalias() += op.lower.bottomRows(r - 1).cwiseProduct(y.topRows(r - 1));
            out.topRows(r - 1).noalias() += op.upper.topRows(r - 1).cwiseProduct(y.bottomRows(r - 1));
        }
    } else {
        if (c > 1) {
            out.rightCols(c - 1).noalias() += op.lower.rightCols(c - 1).cwiseProduct(y.leftCols(c - 1));
            out.leftCols(c - 1).noalias() += op.upper.leftCols(c - 1).cwiseProduct(y.rightCols(c - 1));
        }
    }
}

}  // namespace detail

template <typename Scalar>
GridFunction<Scalar> apply(const SplitOperator<Scalar>& op, const GridFunction<Scalar>& y) {
    if (y.grid != op.grid) throw ValidationError("apply: grid mismatch");
    GridFunction<Scalar> out(y.grid);
    detail::apply_split_add(op, y.mat(), out.mat(), false);
    return out;
}

/// A1 + A2 - shift*I applied as a whole.
template <typename Scalar = double>
struct FullOperator {
    SplitOperator<Scalar> part1, part2;
    Scalar shift{0};

    const Grid2D<Scalar>& grid() const { return part1.grid; }

    Eigen::MatrixX<Scalar> diagonal() const {
        return (part1.diag.array() - part1.shift + part2.diag.array() - part2.shift - shift).matrix();
    }
};

template <typename Scalar>
FullOperator<Scalar> make_full_operator(SplitOperator<Scalar> a1, SplitOperator<Scalar> a2, Scalar shift = Scalar(0)) {
    if (a1.grid != a2.grid) throw ValidationError("FullOperator: parts on different grids");
    if (a1.direction == a2.direction) throw ValidationError("FullOperator: parts must cover both directions");
    return FullOperator<Scalar>{std::move(a1), std::move(a2), shift};
}

// kept as the literal sum of the part applications so that
// apply(FullOperator) == apply(A1) + apply(A2) - s*y bitwise
template <typename Scalar>
GridFunction<Scalar> apply(const FullOperator<Scalar>& op, const GridFunction<Scalar>& y) {
    if (y.grid != op.grid()) throw ValidationError("apply: grid mismatch");
    GridFunction<Scalar> out(y.grid);
    GridFunction<Scalar> part(y.grid);
    auto om = out.mat();
    auto pm = part.mat();
    detail::apply_split_add(op.part1, y.mat(), om, false);
    detail::apply_split_add(op.part2, y.mat(), pm, false);
    out.values += part.values;
    if (op.shift != Scalar(0)) out.values.noalias() -= op.shift * y.values;
    return out;
}

}  // namespace fracell
