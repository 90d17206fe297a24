#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "fracell/linsolve.hpp"
#include "fracell/operators.hpp"

namespace fracell {

enum class BasisKind { analytic, dense_numeric };

/// Eigenpairs of the discrete operator, normalized in the grid inner product,
/// eigenvalues ascending. The analytic flavour (constant-coefficient Laplacian)
/// keeps the separable sine structure instead of storing M eigenvectors.
template <typename Scalar = double>
struct EigenBasis {
    using Matrix = Eigen::MatrixX<Scalar>;
    using Vector = Eigen::VectorX<Scalar>;

    BasisKind kind{BasisKind::analytic};
    Grid2D<Scalar> grid;
    Vector eigenvalues;                            // ascending, size M
    std::vector<std::pair<int, int>> mode_index;   // analytic: (m1,m2) per sorted position

    // analytic flavour
    Matrix sine1, sine2;   // S_k(i,m) = sin(pi (m+1)(i+1) / N_k), symmetric
    Vector lambda1, lambda2;

    // dense flavour
    Matrix vectors;        // columns l2-orthonormal; divide by sqrt(h1 h2) for H-normalization

    std::int64_t modes() const { return eigenvalues.size(); }

    /// m-th eigenvector (0-based, ascending eigenvalue order), H-normalized.
    GridFunction<Scalar> eigenvector(std::int64_t m) const {
        using std::sqrt;
        GridFunction<Scalar> out(grid);
        if (kind == BasisKind::dense_numeric) {
            out.values = vectors.col(m) / sqrt(grid.h1() * grid.h2());
        } else {
            const auto [m1, m2] = mode_index[std::size_t(m)];
            const Scalar cn = Scalar(2) / sqrt(grid.l1 * grid.l2);
            out.mat().noalias() = cn * sine1.col(m1 - 1) * sine2.col(m2 - 1).transpose();
        }
        return out;
    }
};

/// Exact eigenpairs of the discrete Laplacian (k = 1, c = 0):
/// phi(i1,i2) ~ sin(pi m1 i1/N1) sin(pi m2 i2/N2),
/// lambda = sum_k (4/h_k^2) sin^2(pi m_k/(2 N_k)).
template <typename Scalar>
EigenBasis<Scalar> analytic_laplacian_basis(const Grid2D<Scalar>& grid) {
    using std::sin;
    EigenBasis<Scalar> basis;
    basis.kind = BasisKind::analytic;
    basis.grid = grid;
    const int r = grid.rows(), c = grid.cols();

    basis.sine1.resize(r, r);
    basis.lambda1.resize(r);
    for (int m = 1; m <= r; ++m) {
        const Scalar s = sin(Scalar(EIGEN_PI) * Scalar(m) / (Scalar(2) * grid.n1));
        basis.lambda1[m - 1] = Scalar(4) / (grid.h1() * grid.h1()) * s * s;
        for (int i = 1; i <= r; ++i)
            basis.sine1(i - 1, m - 1) = sin(Scalar(EIGEN_PI) * Scalar(m) * Scalar(i) / Scalar(grid.n1));
    }
    basis.sine2.resize(c, c);
    basis.lambda2.resize(c);
    for (int m = 1; m <= c; ++m) {
        const Scalar s = sin(Scalar(EIGEN_PI) * Scalar(m) / (Scalar(2) * grid.n2));
        basis.lambda2[m - 1] = Scalar(4) / (grid.h2() * grid.h2()) * s * s;
        for (int i = 1; i <= c; ++i)
            basis.sine2(i - 1, m - 1) = sin(Scalar(EIGEN_PI) * Scalar(m) * Scalar(i) / Scalar(grid.n2));
    }

    basis.eigenvalues.resize(grid.size());
    basis.mode_index.resize(std::size_t(grid.size()));
    std::vector<std::int64_t> order(std::size_t(grid.size()));
    std::iota(order.begin(), order.end(), 0);
    Eigen::VectorX<Scalar> lam_flat(grid.size());
    for (int m2 = 1; m2 <= c; ++m2)
        for (int m1 = 1; m1 <= r; ++m1)
            lam_flat[(m1 - 1) + std::int64_t(r) * (m2 - 1)] = basis.lambda1[m1 - 1] + basis.lambda2[m2 - 1];
    std::stable_sort(order.begin(), order.end(),
                     [&](std::int64_t a, std::int64_t b) { return lam_flat[a] < lam_flat[b]; });
    for (std::int64_t m = 0; m < grid.size(); ++m) {
        basis.eigenvalues[m] = lam_flat[order[std::size_t(m)]];
        basis.mode_index[std::size_t(m)] = {int(order[std::size_t(m)] % r) + 1, int(order[std::size_t(m)] / r) + 1};
    }
    return basis;
}

/// Dense symmetric eigendecomposition of an assembled operator. Verification
/// fallback for variable coefficients; capped at M <= 4096.
template <typename Scalar>
EigenBasis<Scalar> dense_basis(const FullOperator<Scalar>& op) {
    const Grid2D<Scalar>& g = op.grid();
    if (g.size() > 4096) throw ValidationError("dense_basis: M > 4096, dense decomposition refused");
    const auto m = g.size();
    typename EigenBasis<Scalar>::Matrix dense(m, m);
    GridFunction<Scalar> e(g);
    for (std::int64_t j = 0; j < m; ++j) {
        e.values.setZero();
        e.values[j] = Scalar(1);
        dense.col(j) = apply(op, e).values;
    }
    Eigen::SelfAdjointEigenSolver<typename EigenBasis<Scalar>::Matrix> es(dense);
    if (es.info() != Eigen::Success) throw SolverError("dense_basis: eigendecomposition failed");
    EigenBasis<Scalar> basis;
    basis.kind = BasisKind::dense_numeric;
    basis.grid = g;
    basis.eigenvalues = es.eigenvalues();
    basis.vectors = es.eigenvectors();
    return basis;
}

namespace detail {

// y -> sum_m (y,phi_m) lambda_m^e phi_m, lambda^e computed as exp(e ln lambda).
template <typename Scalar>
GridFunction<Scalar> spectral_filter(const EigenBasis<Scalar>& basis, Scalar exponent, const GridFunction<Scalar>& y) {
    using std::exp;
    using std::log;
    using std::sqrt;
    if (y.grid != basis.grid) throw ValidationError("spectral filter: grid mismatch");
    if (basis.eigenvalues.size() == 0 || !(basis.eigenvalues[0] > Scalar(0)))
        throw SolverError("spectral filter: non-positive eigenvalue (operator is not positive definite)");
    GridFunction<Scalar> out(y.grid);
    if (basis.kind == BasisKind::dense_numeric) {
        Eigen::VectorX<Scalar> coef = basis.vectors.transpose() * y.values;
        coef.array() *= (exponent * basis.eigenvalues.array().log()).exp();
        out.values.noalias() = basis.vectors * coef;
        return out;
    }
    const Grid2D<Scalar>& g = basis.grid;
    const Scalar cn = Scalar(2) / sqrt(g.l1 * g.l2);
    Eigen::MatrixX<Scalar> coef = (cn * g.h1() * g.h2()) * (basis.sine1 * (y.mat() * basis.sine2));
    for (int m2 = 0; m2 < g.cols(); ++m2)
        for (int m1 = 0; m1 < g.rows(); ++m1)
            coef(m1, m2) *= exp(exponent * log(basis.lambda1[m1] + basis.lambda2[m2]));
    out.mat().noalias() = cn * (basis.sine1 * (coef * basis.sine2));
    return out;
}

template <typename Scalar>
void require_fractional_exponent(Scalar alpha, const char* where) {
    if (!(alpha > Scalar(0)) || alpha > Scalar(1))
        throw ValidationError(std::string(where) + ": alpha must lie in (0, 1]");
}

}  // namespace detail

/// A^alpha y by the spectral definition; alpha in (0, 1].
template <typename Scalar>
GridFunction<Scalar> apply_fractional_power(const EigenBasis<Scalar>& basis, Scalar alpha,
                                            const GridFunction<Scalar>& y) {
    detail::require_fractional_exponent(alpha, "apply_fractional_power");
    return detail::spectral_filter(basis, alpha, y);
}

/// Exact discrete solution w of A^alpha w = f.
template <typename Scalar>
GridFunction<Scalar> reference_solve(const EigenBasis<Scalar>& basis, Scalar alpha, const GridFunction<Scalar>& f) {
    detail::require_fractional_exponent(alpha, "reference_solve");
    return detail::spectral_filter(basis, -alpha, f);
}

/// Continuous eigenvalues of the two forcing modes of the unit-square model
/// problem: nu1 for sin(pi x1) sin(pi x2), nu2 for sin(3 pi x1) sin(2 pi x2).
template <typename Scalar>
constexpr Scalar model_nu1() { return Scalar(2) * Scalar(EIGEN_PI) * Scalar(EIGEN_PI); }
template <typename Scalar>
constexpr Scalar model_nu2() { return Scalar(13) * Scalar(EIGEN_PI) * Scalar(EIGEN_PI); }

/// Exact solution of the continuous model problem sampled at interior nodes:
/// u = nu1^-alpha sin(pi x1) sin(pi x2) + nu2^-alpha sin(3 pi x1) sin(2 pi x2).
template <typename Scalar>
GridFunction<Scalar> exact_continuous_solution(const Grid2D<Scalar>& grid, Scalar alpha) {
    using std::exp;
    using std::log;
    using std::sin;
    if (grid.l1 != Scalar(1) || grid.l2 != Scalar(1))
        throw ValidationError("exact_continuous_solution: defined on the unit square only");
    detail::require_fractional_exponent(alpha, "exact_continuous_solution");
    const Scalar a1 = exp(-alpha * log(model_nu1<Scalar>()));
    const Scalar a2 = exp(-alpha * log(model_nu2<Scalar>()));
    const Scalar pi = Scalar(EIGEN_PI);
    return GridFunction<Scalar>::sample(grid, [&](Scalar x1, Scalar x2) {
        return a1 * sin(pi * x1) * sin(pi * x2) + a2 * sin(Scalar(3) * pi * x1) * sin(Scalar(2) * pi * x2);
    });
}

}  // namespace fracell
