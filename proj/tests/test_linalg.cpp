#include "doctest.h"

#include <cmath>
#include <random>

#include "fuzzreg/linalg.hpp"
#include "fuzzreg/random.hpp"

using namespace fuzzreg;
using linalg::Matrix;
using linalg::Vector;

namespace {

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

double max_abs_diff(const Vector& a, const Vector& b) {
    REQUIRE(a.size() == b.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

Matrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.entries()) v = 2.0 * rng::unit_double(gen) - 1.0;
    return m;
}

} // namespace

TEST_SUITE("linalg") {

TEST_CASE("gram of a single row is the outer product") {
    const Matrix g = linalg::gram(from_rows({{1.0, 2.0}}));
    CHECK(g == from_rows({{1.0, 2.0}, {2.0, 4.0}}));
}

TEST_CASE("gram of the identity is the identity") {
    CHECK(linalg::gram(Matrix::identity(2)) == Matrix::identity(2));
}

TEST_CASE("gram of a ones column") {
    const Matrix g = linalg::gram(from_rows({{1.0}, {1.0}}));
    CHECK(g.rows() == 1);
    CHECK(g(0, 0) == 2.0);
}

TEST_CASE("gram is exactly symmetric and positive semidefinite") {
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t rows = 1 + rng::uniform_index(gen, 20);
        const std::size_t cols = 1 + rng::uniform_index(gen, 10);
        const Matrix phi = random_matrix(gen, rows, cols);
        const Matrix g = linalg::gram(phi);
        for (std::size_t i = 0; i < cols; ++i)
            for (std::size_t j = 0; j < cols; ++j) CHECK(g(i, j) == g(j, i));
        Vector x(cols);
        for (double& v : x) v = 2.0 * rng::unit_double(gen) - 1.0;
        const Vector gx = linalg::matvec(g, x);
        CHECK(linalg::dot(x, gx) >= -1e-12);
    }
}

TEST_CASE("spd_solve on diagonal and identity systems") {
    Matrix two_eye = Matrix::identity(2);
    two_eye(0, 0) = two_eye(1, 1) = 2.0;
    CHECK(max_abs_diff(linalg::spd_solve(two_eye, Vector{4.0, 6.0}), {2.0, 3.0}) < 1e-14);
    CHECK(max_abs_diff(linalg::spd_solve(Matrix::identity(3), Vector{1.0, 0.0, -1.0}),
                       {1.0, 0.0, -1.0}) < 1e-14);
}

TEST_CASE("spd_solve matches hand elimination") {
    const Matrix m = from_rows({{2.0, 1.0}, {1.0, 2.0}});
    CHECK(max_abs_diff(linalg::spd_solve(m, Vector{3.0, 3.0}), {1.0, 1.0}) < 1e-14);
}

TEST_CASE("spd_solve rejects indefinite matrices") {
    const Matrix m = from_rows({{1.0, 2.0}, {2.0, 1.0}});
    CHECK_THROWS_AS(linalg::spd_solve(m, Vector{1.0, 1.0}), NotPositiveDefinite);
}

TEST_CASE("spd_solve round-trips on random SPD systems") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng::uniform_index(gen, 15);
        Matrix lower(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) lower(i, j) = 2.0 * rng::unit_double(gen) - 1.0;
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = i == j ? 1.0 : 0.0; // L L^T + I
                for (std::size_t k = 0; k < n; ++k) s += lower(i, k) * lower(j, k);
                m(i, j) = s;
            }
        Vector b(n);
        for (double& v : b) v = 4.0 * rng::unit_double(gen) - 2.0;
        const Vector x = linalg::spd_solve(m, b);
        const Vector mx = linalg::matvec(m, x);
        CHECK(max_abs_diff(mx, b) <= 1e-10 * std::max(1.0, linalg::norm2(b)));
    }
}

TEST_CASE("min_norm_lstsq matches the normal equations on simple systems") {
    CHECK(max_abs_diff(linalg::min_norm_lstsq(from_rows({{1.0}, {1.0}}), Vector{1.0, 3.0}),
                       {2.0}) < 1e-12);
    CHECK(max_abs_diff(linalg::min_norm_lstsq(Matrix::identity(2), Vector{5.0, 7.0}),
                       {5.0, 7.0}) < 1e-12);
}

TEST_CASE("min_norm_lstsq picks the minimum-norm solution when underdetermined") {
    CHECK(max_abs_diff(linalg::min_norm_lstsq(from_rows({{1.0, 1.0}}), Vector{2.0}),
                       {1.0, 1.0}) < 1e-12);
    // Rank-deficient overdetermined case: minimum norm splits the fit evenly.
    const Matrix phi = from_rows({{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}});
    CHECK(max_abs_diff(linalg::min_norm_lstsq(phi, Vector{3.0, 3.0, 3.0}), {1.5, 1.5}) < 1e-12);
}

TEST_CASE("min_norm_lstsq satisfies the normal equations on random full-rank systems") {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t cols = 1 + rng::uniform_index(gen, 12);
        const std::size_t rows = cols + rng::uniform_index(gen, 20);
        const Matrix phi = random_matrix(gen, rows, cols);
        Vector g(rows);
        for (double& v : g) v = 2.0 * rng::unit_double(gen) - 1.0;
        const Vector x = linalg::min_norm_lstsq(phi, g);
        const Vector lhs = linalg::matvec_transposed(phi, linalg::matvec(phi, x));
        const Vector rhs = linalg::matvec_transposed(phi, g);
        CHECK(max_abs_diff(lhs, rhs) <= 1e-8 * std::max(1.0, linalg::norm2(rhs)));
    }
}

TEST_CASE("dimension mismatches are rejected") {
    const Matrix phi = from_rows({{1.0, 2.0}});
    CHECK_THROWS_AS(linalg::min_norm_lstsq(phi, Vector{1.0, 2.0}), DimensionMismatch);
    CHECK_THROWS_AS(linalg::spd_solve(Matrix::identity(2), Vector{1.0}), DimensionMismatch);
    CHECK_THROWS_AS(linalg::spd_solve(from_rows({{1.0, 0.0}}), Vector{1.0}), DimensionMismatch);
}

} // TEST_SUITE
