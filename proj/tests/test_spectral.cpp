#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fracell/spectral.hpp"
#include "support/mode_oracle.hpp"

using fracell::CoefficientField;
using fracell::EigenBasis;
using fracell::Grid2D;
using fracell::GridFunction;

namespace {

GridFunction<double> random_function(const Grid2D<double>& grid, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    GridFunction<double> y(grid);
    for (auto& v : y.values) v = dist(gen);
    return y;
}

fracell::FullOperator<double> laplacian(const Grid2D<double>& g) {
    const auto coeff = CoefficientField<double>::constant(g, 1.0, 0.0);
    return fracell::make_full_operator(fracell::assemble_direction_operator(g, coeff, 1),
                                       fracell::assemble_direction_operator(g, coeff, 2));
}

}  // namespace

TEST_CASE("analytic basis: smallest eigenvalue equals the certified bound") {
    const Grid2D<double> g(1.0, 1.0, 10, 10);
    const auto basis = fracell::analytic_laplacian_basis(g);
    const double delta = 2 * oracle::delta_1d(10);
    CHECK(basis.eigenvalues[0] == doctest::Approx(delta).epsilon(1e-14));
    for (Eigen::Index m = 1; m < basis.modes(); ++m) CHECK(basis.eigenvalues[m] >= basis.eigenvalues[m - 1]);
}

TEST_CASE("analytic basis: eigenvectors are orthonormal in H") {
    const Grid2D<double> g(1.0, 1.0, 10, 10);
    const auto basis = fracell::analytic_laplacian_basis(g);
    for (int m = 0; m < 10; ++m) {
        for (int n = m; n < 10; ++n) {
            const double prod = fracell::inner_product(basis.eigenvector(m), basis.eigenvector(n));
            CHECK(std::abs(prod - (m == n ? 1.0 : 0.0)) <= 1e-10);
        }
    }
}

TEST_CASE("analytic basis: eigenpairs satisfy the operator equation") {
    const Grid2D<double> g(1.0, 1.0, 12, 9);
    const auto basis = fracell::analytic_laplacian_basis(g);
    const auto a = laplacian(g);
    std::mt19937 gen(5);
    std::uniform_int_distribution<Eigen::Index> pick(0, basis.modes() - 1);
    for (int trial = 0; trial < 5; ++trial) {
        const auto m = pick(gen);
        const auto phi = basis.eigenvector(m);
        GridFunction<double> residual = fracell::apply(a, phi);
        residual.values -= basis.eigenvalues[m] * phi.values;
        CHECK(fracell::norm_h(residual) <= 1e-10 * basis.eigenvalues[m]);
    }
}

TEST_CASE("dense basis agrees with the analytic one") {
    const Grid2D<double> g(1.0, 1.0, 9, 8);
    const auto dense = fracell::dense_basis(laplacian(g));
    const auto analytic = fracell::analytic_laplacian_basis(g);
    for (Eigen::Index m = 0; m < dense.modes(); ++m)
        CHECK(dense.eigenvalues[m] == doctest::Approx(analytic.eigenvalues[m]).epsilon(1e-9));
    // orthonormality in the grid inner product
    for (int m = 0; m < 5; ++m)
        CHECK(fracell::inner_product(dense.eigenvector(m), dense.eigenvector(m)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("dense basis of a scalar operator") {
    const Grid2D<double> g(1.0, 1.0, 5, 5);
    fracell::SplitOperator<double> z1, z2;
    for (auto* z : {&z1, &z2}) {
        z->grid = g;
        z->lower.setZero(g.rows(), g.cols());
        z->diag.setZero(g.rows(), g.cols());
        z->upper.setZero(g.rows(), g.cols());
    }
    z1.direction = 1;
    z2.direction = 2;
    const double a = 4.25;
    const auto op = fracell::make_full_operator(z1, z2, -a);   // 0 + 0 + a*I
    const auto basis = fracell::dense_basis(op);
    CHECK(basis.eigenvalues.minCoeff() == doctest::Approx(a).epsilon(1e-13));
    CHECK(basis.eigenvalues.maxCoeff() == doctest::Approx(a).epsilon(1e-13));
}

TEST_CASE("dense basis eigenvalue sum equals the operator trace") {
    const Grid2D<double> g(1.0, 1.0, 7, 6);
    const auto coeff = CoefficientField<double>::sample(
        g, [](double x1, double x2) { return 1.0 + 0.4 * x1 * x2; }, [](double x1, double) { return x1; }, 1.0);
    const auto a1 = fracell::assemble_direction_operator(g, coeff, 1);
    const auto a2 = fracell::assemble_direction_operator(g, coeff, 2);
    const auto a = fracell::make_full_operator(a1, a2);
    const auto basis = fracell::dense_basis(a);
    const double trace = a.diagonal().sum();
    CHECK(basis.eigenvalues.sum() == doctest::Approx(trace).epsilon(1e-12));
}

TEST_CASE("dense basis refuses large problems") {
    const Grid2D<double> g(1.0, 1.0, 70, 70);   // M = 69^2 = 4761 > 4096
    CHECK_THROWS_AS((void)fracell::dense_basis(laplacian(g)), fracell::ValidationError);
}

TEST_CASE("fractional power acts mode-wise") {
    const Grid2D<double> g(1.0, 1.0, 11, 11);
    const auto basis = fracell::analytic_laplacian_basis(g);
    const double alpha = 0.37;
    const auto phi = basis.eigenvector(7);
    const auto out = fracell::apply_fractional_power(basis, alpha, phi);
    GridFunction<double> expected = phi;
    expected.values *= std::pow(basis.eigenvalues[7], alpha);
    CHECK((out.values - expected.values).cwiseAbs().maxCoeff() <= 1e-10 * expected.values.cwiseAbs().maxCoeff());
}

TEST_CASE("alpha = 1 recovers the operator, and half powers compose") {
    const Grid2D<double> g(1.0, 1.0, 13, 10);
    const auto basis = fracell::analytic_laplacian_basis(g);
    const auto a = laplacian(g);
    const auto y = random_function(g, 3);

    const auto full_power = fracell::apply_fractional_power(basis, 1.0, y);
    const auto direct = fracell::apply(a, y);
    GridFunction<double> diff = full_power;
    diff.values -= direct.values;
    CHECK(fracell::norm_h(diff) <= 1e-9 * fracell::norm_h(direct));

    const auto half = fracell::apply_fractional_power(basis, 0.5, y);
    const auto twice = fracell::apply_fractional_power(basis, 0.5, half);
    diff = twice;
    diff.values -= direct.values;
    CHECK(fracell::norm_h(diff) <= 1e-9 * fracell::norm_h(direct));
}

TEST_CASE("fractional power validates the exponent") {
    const Grid2D<double> g(1.0, 1.0, 4, 4);
    const auto basis = fracell::analytic_laplacian_basis(g);
    const GridFunction<double> y(g);
    CHECK_THROWS_AS((void)fracell::apply_fractional_power(basis, 0.0, y), fracell::ValidationError);
    CHECK_THROWS_AS((void)fracell::apply_fractional_power(basis, 1.5, y), fracell::ValidationError);
    CHECK_THROWS_AS((void)fracell::reference_solve(basis, -0.5, y), fracell::ValidationError);
}

TEST_CASE("reference solve: single mode and round trip") {
    const Grid2D<double> g(1.0, 1.0, 12, 12);
    const auto basis = fracell::analytic_laplacian_basis(g);
    const double alpha = 0.5;

    const auto phi = basis.eigenvector(0);
    const auto w = fracell::reference_solve(basis, alpha, phi);
    GridFunction<double> expected = phi;
    expected.values *= std::pow(basis.eigenvalues[0], -alpha);
    CHECK((w.values - expected.values).cwiseAbs().maxCoeff() <= 1e-12);

    const auto f = random_function(g, 8);
    const auto round = fracell::apply_fractional_power(basis, alpha, fracell::reference_solve(basis, alpha, f));
    GridFunction<double> diff = round;
    diff.values -= f.values;
    CHECK(fracell::norm_h(diff) <= 1e-9 * fracell::norm_h(f));
}

TEST_CASE("alpha -> 1 recovers the plain elliptic solve") {
    const Grid2D<double> g(1.0, 1.0, 16, 16);
    const auto basis = fracell::analytic_laplacian_basis(g);
    const auto a = laplacian(g);
    const auto f = random_function(g, 21);
    const auto w_spectral = fracell::reference_solve(basis, 1.0, f);
    // A = delta*I + (A - delta*I) so the CG path applies
    const double delta = 2 * oracle::delta_1d(16);
    const auto d = fracell::make_full_operator(a.part1, a.part2, delta);
    const auto w_cg = fracell::spd_solve(fracell::ShiftedOperator<double>{&d, delta, 1.0}, f, 1e-13);
    GridFunction<double> diff = w_spectral;
    diff.values -= w_cg.values;
    CHECK(fracell::norm_h(diff) <= 1e-8 * fracell::norm_h(w_cg));
}

TEST_CASE("exact continuous solution of the model problem") {
    const Grid2D<double> g(1.0, 1.0, 8, 8);
    const double alpha = 0.5;
    const auto u = fracell::exact_continuous_solution(g, alpha);
    // second forcing mode vanishes at the domain centre
    CHECK(u.at(4, 4) == doctest::Approx(std::pow(fracell::model_nu1<double>(), -alpha)).epsilon(1e-14));
    // amplitude of the first mode
    const auto basis = fracell::analytic_laplacian_basis(g);
    const auto phi = basis.eigenvector(0);
    const double coef = fracell::inner_product(u, phi) / fracell::inner_product(phi, phi);
    const double expected = std::pow(fracell::model_nu1<double>(), -alpha) / 2.0;   // phi is H-normalized: 2 sin sin
    CHECK(coef == doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS((void)fracell::exact_continuous_solution(Grid2D<double>(2.0, 1.0, 8, 8), alpha),
                    fracell::ValidationError);
}

TEST_CASE("Parseval identity for random functions") {
    const Grid2D<double> g(1.0, 1.0, 9, 7);
    const auto basis = fracell::analytic_laplacian_basis(g);
    for (unsigned seed = 0; seed < 5; ++seed) {
        const auto y = random_function(g, 30 + seed);
        double sum = 0.0;
        for (Eigen::Index m = 0; m < basis.modes(); ++m) {
            const double c = fracell::inner_product(y, basis.eigenvector(m));
            sum += c * c;
        }
        const double n2 = fracell::inner_product(y, y);
        CHECK(sum == doctest::Approx(n2).epsilon(1e-9));
    }
}

TEST_CASE("lambda^-alpha decreases in alpha for lambda > 1") {
    const Grid2D<double> g(1.0, 1.0, 10, 10);
    const auto basis = fracell::analytic_laplacian_basis(g);
    for (Eigen::Index m : {Eigen::Index(0), basis.modes() / 2, basis.modes() - 1}) {
        const double lambda = basis.eigenvalues[m];
        REQUIRE(lambda > 1.0);
        double previous = std::pow(lambda, -0.05);
        for (double alpha : {0.25, 0.5, 0.75, 1.0}) {
            const double value = std::pow(lambda, -alpha);
            CHECK(value < previous);
            previous = value;
        }
    }
}
