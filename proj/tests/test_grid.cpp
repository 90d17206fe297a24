#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fracell/grid.hpp"
#include "fracell/operators.hpp"
#include "support/mode_oracle.hpp"

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

}  // namespace

TEST_CASE("grid construction and invariants") {
    const Grid2D<double> g(1.0, 2.0, 4, 8);
    CHECK(g.h1() == doctest::Approx(0.25));
    CHECK(g.h2() == doctest::Approx(0.25));
    CHECK(g.size() == 3 * 7);
    CHECK_THROWS_AS(Grid2D<double>(1.0, 1.0, 1, 4), fracell::ValidationError);
    CHECK_THROWS_AS(Grid2D<double>(0.0, 1.0, 4, 4), fracell::ValidationError);
}

TEST_CASE("inner product on the single-node grid") {
    const Grid2D<double> g(1.0, 1.0, 2, 2);
    GridFunction<double> one(g);
    one.values.setOnes();
    CHECK(fracell::inner_product(one, one) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("inner product is bilinear in the zero argument") {
    const Grid2D<double> g(1.0, 1.0, 5, 7);
    const auto y = random_function(g, 11);
    const GridFunction<double> zero(g);
    CHECK(fracell::inner_product(y, zero) == 0.0);
}

TEST_CASE("inner product of the sine mode matches brute-force summation") {
    const Grid2D<double> g(1.0, 1.0, 4, 4);
    const auto y = oracle::sample_mode(g, 1, 1);
    const double expected = oracle::brute_force_inner(y, y);
    CHECK(fracell::inner_product(y, y) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("inner product rejects grid mismatch") {
    const GridFunction<double> a((Grid2D<double>(1.0, 1.0, 4, 4)));
    const GridFunction<double> b((Grid2D<double>(1.0, 1.0, 4, 5)));
    CHECK_THROWS_AS((void)fracell::inner_product(a, b), fracell::ValidationError);
}

TEST_CASE("norm_h basics") {
    const Grid2D<double> g(1.0, 1.0, 6, 9);
    GridFunction<double> y(g);
    CHECK(fracell::norm_h(y) == 0.0);

    y.values.setOnes();
    CHECK(fracell::norm_h(y) == doctest::Approx(std::sqrt(double(g.size()) * g.h1() * g.h2())).epsilon(1e-15));

    auto z = random_function(g, 3);
    GridFunction<double> scaled = z;
    scaled.values *= -2.5;
    CHECK(fracell::norm_h(scaled) == doctest::Approx(2.5 * fracell::norm_h(z)).epsilon(1e-14));
}

TEST_CASE("Cauchy-Schwarz holds for random functions") {
    const Grid2D<double> g(1.0, 1.0, 12, 10);
    for (unsigned seed = 0; seed < 20; ++seed) {
        const auto y = random_function(g, 100 + seed);
        const auto w = random_function(g, 200 + seed);
        CHECK(std::abs(fracell::inner_product(y, w)) <=
              fracell::norm_h(y) * fracell::norm_h(w) * (1.0 + 1e-14));
    }
}

TEST_CASE("inner product is bitwise symmetric") {
    const Grid2D<double> g(1.0, 1.0, 13, 11);
    for (unsigned seed = 0; seed < 10; ++seed) {
        const auto y = random_function(g, 300 + seed);
        const auto w = random_function(g, 400 + seed);
        CHECK(fracell::inner_product(y, w) == fracell::inner_product(w, y));
    }
}

TEST_CASE("norm_energy squares to the quadratic form within rounding") {
    const Grid2D<double> g(1.0, 1.0, 9, 9);
    const auto coeff = fracell::CoefficientField<double>::constant(g, 1.0, 0.0);
    const auto a1 = fracell::assemble_direction_operator(g, coeff, 1);
    const auto a2 = fracell::assemble_direction_operator(g, coeff, 2);
    const auto a = fracell::make_full_operator(a1, a2);
    for (unsigned seed = 0; seed < 10; ++seed) {
        const auto y = random_function(g, 500 + seed);
        const double n = fracell::norm_energy(y, a);
        const double q = fracell::inner_product(fracell::apply(a, y), y);
        CHECK(n * n == doctest::Approx(q).epsilon(4 * std::numeric_limits<double>::epsilon()));
    }
}

TEST_CASE("energy norm is additive over the direction split") {
    const Grid2D<double> g(1.0, 1.0, 8, 6);
    const auto coeff = fracell::CoefficientField<double>::constant(g, 2.0, 1.0);
    const auto a1 = fracell::assemble_direction_operator(g, coeff, 1);
    const auto a2 = fracell::assemble_direction_operator(g, coeff, 2);
    const auto a = fracell::make_full_operator(a1, a2);
    const auto y = random_function(g, 42);
    const double full = fracell::norm_energy(y, a);
    const double e1 = fracell::norm_energy(y, a1);
    const double e2 = fracell::norm_energy(y, a2);
    CHECK(full * full == doctest::Approx(e1 * e1 + e2 * e2).epsilon(1e-13));
}

TEST_CASE("norm_energy flags indefinite operators") {
    const Grid2D<double> g(1.0, 1.0, 4, 4);
    const auto coeff = fracell::CoefficientField<double>::constant(g, 1.0, 0.0);
    auto a1 = fracell::assemble_direction_operator(g, coeff, 1);
    // shift far past the smallest eigenvalue
    a1 = fracell::make_shifted(a1, 1.0e4);
    GridFunction<double> y(g);
    y.values.setOnes();
    CHECK_THROWS_AS((void)fracell::norm_energy(y, a1), fracell::SolverError);
}

TEST_CASE("zero function has zero energy norm") {
    const Grid2D<double> g(1.0, 1.0, 5, 5);
    const auto coeff = fracell::CoefficientField<double>::constant(g, 1.0, 0.0);
    const auto a1 = fracell::assemble_direction_operator(g, coeff, 1);
    CHECK(fracell::norm_energy(GridFunction<double>(g), a1) == 0.0);
}

TEST_CASE("core types instantiate for float") {
    const Grid2D<float> g(1.0f, 1.0f, 8, 8);
    const auto coeff = fracell::CoefficientField<float>::constant(g, 1.0f, 0.0f);
    const auto a1 = fracell::assemble_direction_operator(g, coeff, 1);
    const auto a2 = fracell::assemble_direction_operator(g, coeff, 2);
    const auto a = fracell::make_full_operator(a1, a2);
    const auto y = GridFunction<float>::sample(g, [](float x1, float x2) { return x1 * (1 - x1) * x2 * (1 - x2); });
    const auto ay = fracell::apply(a, y);
    CHECK(fracell::inner_product(ay, y) > 0.0f);
    CHECK(fracell::norm_energy(y, a) == doctest::Approx(std::sqrt(fracell::inner_product(ay, y))).epsilon(1e-6));
}
