#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

#include "fracell/errors.hpp"

namespace fracell {

/// Uniform rectangular grid on (0,l1) x (0,l2) with Dirichlet boundary.
/// Unknowns live on the interior vertices x = (i1*h1, i2*h2), 1 <= i_k <= N_k-1.
template <typename Scalar = double>
struct Grid2D {
    Scalar l1{1}, l2{1};
    int n1{2}, n2{2};

    Grid2D() = default;
    Grid2D(Scalar l1_, Scalar l2_, int n1_, int n2_) : l1(l1_), l2(l2_), n1(n1_), n2(n2_) {
        if (n1 < 2 || n2 < 2) throw ValidationError("Grid2D: need N1 >= 2 and N2 >= 2");
        if (!(l1 > Scalar(0)) || !(l2 > Scalar(0))) throw ValidationError("Grid2D: edge lengths must be positive");
    }

    Scalar h1() const { return l1 / Scalar(n1); }
    Scalar h2() const { return l2 / Scalar(n2); }
    int rows() const { return n1 - 1; }   // interior count, direction 1 (fastest index)
    int cols() const { return n2 - 1; }   // interior count, direction 2
    std::int64_t size() const { return std::int64_t(rows()) * cols(); }
    Scalar x1(int i1) const { return Scalar(i1) * h1(); }
    Scalar x2(int i2) const { return Scalar(i2) * h2(); }

    friend bool operator==(const Grid2D& a, const Grid2D& b) {
        return a.l1 == b.l1 && a.l2 == b.l2 && a.n1 == b.n1 && a.n2 == b.n2;
    }
    friend bool operator!=(const Grid2D& a, const Grid2D& b) { return !(a == b); }
};

/// Real values on the interior nodes, stored lexicographically with i1 fastest.
/// The implied extension by zero outside the interior is never stored.
template <typename Scalar = double>
struct GridFunction {
    using Vector = Eigen::VectorX<Scalar>;
    using MatrixMap = Eigen::Map<Eigen::MatrixX<Scalar>>;
    using ConstMatrixMap = Eigen::Map<const Eigen::MatrixX<Scalar>>;

    Grid2D<Scalar> grid;
    Vector values;

    GridFunction() = default;
    explicit GridFunction(const Grid2D<Scalar>& g) : grid(g), values(Vector::Zero(g.size())) {}
    GridFunction(const Grid2D<Scalar>& g, Vector v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size()) throw ValidationError("GridFunction: value count != interior node count");
    }

    /// Column-major matrix view: row index i1-1, column index i2-1.
    MatrixMap mat() { return MatrixMap(values.data(), grid.rows(), grid.cols()); }
    ConstMatrixMap mat() const { return ConstMatrixMap(values.data(), grid.rows(), grid.cols()); }

    Scalar& at(int i1, int i2) { return values[(i1 - 1) + std::int64_t(grid.rows()) * (i2 - 1)]; }
    Scalar at(int i1, int i2) const { return values[(i1 - 1) + std::int64_t(grid.rows()) * (i2 - 1)]; }

    template <typename Fn>
    static GridFunction sample(const Grid2D<Scalar>& g, Fn&& fn) {
        GridFunction out(g);
        for (int i2 = 1; i2 <= g.cols(); ++i2)
            for (int i1 = 1; i1 <= g.rows(); ++i1) out.at(i1, i2) = fn(g.x1(i1), g.x2(i2));
        return out;
    }
};

namespace detail {

// Pairwise (tree) reduction; keeps reductions reproducible and symmetric
// since the elementwise products commute bitwise.
template <typename Scalar, typename Fn>
Scalar pairwise_sum(std::int64_t begin, std::int64_t count, Fn&& term) {
    if (count <= 16) {
        Scalar s{0};
        for (std::int64_t i = begin; i < begin + count; ++i) s += term(i);
        return s;
    }
    const std::int64_t half = count / 2;
    return pairwise_sum<Scalar>(begin, half, term) + pairwise_sum<Scalar>(begin + half, count - half, term);
}

}  // namespace detail

template <typename Scalar>
void require_same_grid(const GridFunction<Scalar>& y, const GridFunction<Scalar>& w, const char* where) {
    if (y.grid != w.grid) throw ValidationError(std::string(where) + ": grid mismatch");
}

/// (y, w) = sum over interior nodes of y*w*h1*h2.
template <typename Scalar>
Scalar inner_product(const GridFunction<Scalar>& y, const GridFunction<Scalar>& w) {
    require_same_grid(y, w, "inner_product");
    const Scalar* a = y.values.data();
    const Scalar* b = w.values.data();
    const Scalar s = detail::pairwise_sum<Scalar>(0, y.values.size(), [&](std::int64_t i) { return a[i] * b[i]; });
    return s * y.grid.h1() * y.grid.h2();
}

template <typename Scalar>
Scalar norm_h(const GridFunction<Scalar>& y) {
    using std::sqrt;
    return sqrt(inner_product(y, y));
}

/// ||y||_Op = sqrt((Op y, y)). Op must be self-adjoint nonnegative on this grid;
/// a quadratic form below the roundoff floor is clamped to zero, anything more
/// negative is treated as an assembly bug.
template <typename Scalar, typename Op>
Scalar norm_energy(const GridFunction<Scalar>& y, const Op& op) {
    using std::sqrt;
    const GridFunction<Scalar> oy = apply(op, y);
    const Scalar q = inner_product(oy, y);
    if (q >= Scalar(0)) return sqrt(q);
    const Scalar floor = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * norm_h(oy) * norm_h(y);
    if (-q <= floor) return Scalar(0);
    throw SolverError("norm_energy: negative quadratic form (operator is not positive semidefinite)");
}

}  // namespace fracell
