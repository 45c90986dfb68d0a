#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "fuzzreg/metrics.hpp"
#include "fuzzreg/model.hpp"
#include "fuzzreg/model_io.hpp"
#include "fuzzreg/random.hpp"
#include "oracles.hpp"

using namespace fuzzreg;
using linalg::Matrix;
using linalg::Vector;
using model::PenaltySpec;
using poly::Order;

namespace {

constexpr double kLambdaGrid[] = {1e-8, 1e-6, 1e-4, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3};

Matrix random_phi(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.entries()) v = 2.0 * rng::unit_double(gen) - 1.0;
    return m;
}

Vector random_vector(std::mt19937_64& gen, std::size_t n) {
    Vector v(n);
    for (double& x : v) x = 2.0 * rng::unit_double(gen) - 1.0;
    return v;
}

double relative_gap(const Vector& a, const Vector& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(1.0, std::sqrt(den));
}

// A fixed global quadratic in two variables used for recovery tests.
double generating_polynomial(double x1, double x2) {
    return 0.7 - 1.3 * x1 + 0.8 * x2 + 2.1 * x1 * x1 - 0.5 * x1 * x2 + 1.7 * x2 * x2;
}

data::Dataset quadratic_dataset(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    data::Dataset ds;
    ds.name = "quadratic";
    ds.inputs = Matrix(count, 2);
    ds.targets.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double x1 = rng::unit_double(gen);
        const double x2 = rng::unit_double(gen);
        ds.inputs(k, 0) = x1;
        ds.inputs(k, 1) = x2;
        ds.targets[k] = generating_polynomial(x1, x2);
    }
    return ds;
}

model::Model order0_model(std::vector<double> rule_constants) {
    model::Model m;
    m.order = Order::constant;
    m.input_dim = 1;
    m.fuzzifier = 2.0;
    m.prototypes = Matrix(rule_constants.size(), 1);
    for (std::size_t i = 0; i < rule_constants.size(); ++i)
        m.prototypes(i, 0) = (static_cast<double>(i) + 0.5) / rule_constants.size();
    m.coefficients = std::move(rule_constants);
    m.normalizer.minimum = {0.0};
    m.normalizer.maximum = {1.0};
    return m;
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("design matrix row layout: rule index fastest within each term") {
    Matrix inputs(1, 1);
    inputs(0, 0) = 2.0;
    Matrix memberships(2, 1);
    memberships(0, 0) = 0.6;
    memberships(1, 0) = 0.4;
    const Matrix phi = model::build_design_matrix(inputs, memberships, Order::quadratic);
    REQUIRE(phi.rows() == 1);
    REQUIRE(phi.cols() == 6);
    const Vector expected{0.6, 0.4, 1.2, 0.8, 2.4, 1.6};
    for (std::size_t c = 0; c < 6; ++c)
        CHECK(phi(0, c) == doctest::Approx(expected[c]).epsilon(1e-14));
}

TEST_CASE("design matrix shape for a full grid cell") {
    std::mt19937_64 gen(1);
    Matrix inputs(500, 2);
    for (double& v : inputs.entries()) v = rng::unit_double(gen);
    Matrix memberships(10, 500);
    for (std::size_t k = 0; k < 500; ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < 10; ++i) sum += memberships(i, k) = rng::unit_double(gen) + 0.01;
        for (std::size_t i = 0; i < 10; ++i) memberships(i, k) /= sum;
    }
    const Matrix phi = model::build_design_matrix(inputs, memberships, Order::quadratic);
    CHECK(phi.rows() == 500);
    CHECK(phi.cols() == 60);
}

TEST_CASE("design matrix for one constant rule is the all-ones column") {
    Matrix inputs(4, 3);
    Matrix memberships(1, 4);
    for (std::size_t k = 0; k < 4; ++k) memberships(0, k) = 1.0;
    const Matrix phi = model::build_design_matrix(inputs, memberships, Order::constant);
    REQUIRE(phi.cols() == 1);
    for (std::size_t k = 0; k < 4; ++k) CHECK(phi(k, 0) == 1.0);
}

TEST_CASE("design matrix validates membership normalization and shape") {
    Matrix inputs(2, 1);
    Matrix bad(1, 2);
    bad(0, 0) = 0.5;
    bad(0, 1) = 0.7;
    CHECK_THROWS_AS(model::build_design_matrix(inputs, bad, Order::constant), InvalidArgument);
    Matrix wrong(1, 3);
    CHECK_THROWS_AS(model::build_design_matrix(inputs, wrong, Order::constant),
                    DimensionMismatch);
}

TEST_CASE("penalty diagonal follows the column blocks") {
    const PenaltySpec p{0.1, 0.2, 0.3};
    CHECK(model::build_penalty_diagonal(2, 1, Order::quadratic, p) ==
          std::vector<double>{0.1, 0.1, 0.2, 0.2, 0.3, 0.3});
    const PenaltySpec uniform{0.5, 0.5, 0.5};
    CHECK(model::build_penalty_diagonal(3, 2, Order::quadratic, uniform) ==
          std::vector<double>(18, 0.5));
    CHECK(model::build_penalty_diagonal(2, 2, Order::quadratic, PenaltySpec{}) ==
          std::vector<double>(12, 0.0));
}

TEST_CASE("coefficient fit on identity designs") {
    const Matrix eye = Matrix::identity(2);
    const auto ridge = model::fit_coefficients(eye, Vector{2.0, 4.0}, Vector{1.0, 1.0});
    CHECK(ridge.coefficients[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ridge.coefficients[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_FALSE(ridge.used_min_norm_fallback);
    const auto plain = model::fit_coefficients(eye, Vector{2.0, 4.0}, Vector{0.0, 0.0});
    CHECK(plain.coefficients[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(plain.coefficients[1] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("coefficient fit matches the elimination oracle on random instances") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 40; ++trial) {
        const Matrix phi = random_phi(gen, 20, 6);
        const Vector g = random_vector(gen, 20);
        Vector diagonal(6);
        for (double& d : diagonal) d = kLambdaGrid[rng::uniform_index(gen, 9)];
        const auto fit = model::fit_coefficients(phi, g, diagonal);
        const auto reference = oracles::ridge_solution(phi, g, diagonal);
        CHECK(relative_gap(fit.coefficients, reference) <= 1e-8);
    }
}

TEST_CASE("gradient vanishes at the solution and matches finite differences") {
    std::mt19937_64 gen(23);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t q = 3 + rng::uniform_index(gen, 4);
        const Matrix phi = random_phi(gen, 12 + rng::uniform_index(gen, 10), q);
        const Vector g = random_vector(gen, phi.rows());
        Vector diagonal(q);
        for (double& d : diagonal) d = kLambdaGrid[rng::uniform_index(gen, 9)];
        const auto fit = model::fit_coefficients(phi, g, diagonal);

        // Analytic gradient of the penalized objective at the solution:
        // 2 (Phi^T Phi A + D A - Phi^T G), evaluated with library primitives.
        const Matrix gram = linalg::gram(phi);
        const Vector rhs = linalg::matvec_transposed(phi, g);
        Vector grad = linalg::matvec(gram, fit.coefficients);
        for (std::size_t i = 0; i < q; ++i)
            grad[i] = 2.0 * (grad[i] + diagonal[i] * fit.coefficients[i] - rhs[i]);
        CHECK(linalg::norm2(grad) <= 1e-8 * std::max(1.0, linalg::norm2(rhs)));

        // Central differences of the objective, step 1e-5.
        for (std::size_t i = 0; i < q; ++i) {
            Vector up = fit.coefficients, down = fit.coefficients;
            up[i] += 1e-5;
            down[i] -= 1e-5;
            const double fd = (oracles::ridge_objective(phi, g, diagonal, up) -
                               oracles::ridge_objective(phi, g, diagonal, down)) /
                              2e-5;
            CHECK(std::abs(fd - grad[i]) <= 1e-4 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("uniform penalties reduce to plain ridge") {
    std::mt19937_64 gen(29);
    const Matrix phi = random_phi(gen, 25, 8);
    const Vector g = random_vector(gen, 25);
    for (double lambda : kLambdaGrid) {
        const Vector diagonal(8, lambda);
        const auto fit = model::fit_coefficients(phi, g, diagonal);
        const auto reference = oracles::ridge_solution(phi, g, diagonal);
        CHECK(relative_gap(fit.coefficients, reference) <= 1e-10);
    }
}

TEST_CASE("training error never improves as the penalty grows") {
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t q = 4 + rng::uniform_index(gen, 6);
        const Matrix phi = random_phi(gen, q + 6 + rng::uniform_index(gen, 20), q);
        const Vector g = random_vector(gen, phi.rows());

        const auto sse_of = [&](const Vector& diagonal) {
            const auto fit = model::fit_coefficients(phi, g, diagonal);
            const Vector pred = linalg::matvec(phi, fit.coefficients);
            double sse = 0.0;
            for (std::size_t r = 0; r < g.size(); ++r)
                sse += (g[r] - pred[r]) * (g[r] - pred[r]);
            return sse;
        };

        // Uniform ridge along the grid.
        double previous = sse_of(Vector(q, 0.0));
        for (double lambda : kLambdaGrid) {
            const double current = sse_of(Vector(q, lambda));
            CHECK(current >= previous - 1e-9);
            previous = current;
        }

        // Scaling a fixed ordered triple applied to thirds of the columns.
        Vector base(q, 0.0);
        for (std::size_t i = 0; i < q; ++i)
            base[i] = i < q / 3 ? 1e-4 : (i < 2 * q / 3 ? 1e-2 : 1e-1);
        previous = sse_of(base);
        for (double scale : {10.0, 100.0, 1000.0}) {
            Vector scaled = base;
            for (double& d : scaled) d *= scale;
            const double current = sse_of(scaled);
            CHECK(current >= previous - 1e-9);
            previous = current;
        }
    }
}

TEST_CASE("coefficients shrink as the penalty grows") {
    std::mt19937_64 gen(37);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t q = 4 + rng::uniform_index(gen, 6);
        const Matrix phi = random_phi(gen, q + 10, q);
        const Vector g = random_vector(gen, phi.rows());

        // Euclidean norm shrinks along the uniform-ridge grid.
        double previous = std::numeric_limits<double>::infinity();
        for (double lambda : kLambdaGrid) {
            const auto fit = model::fit_coefficients(phi, g, Vector(q, lambda));
            const double norm = linalg::norm2(fit.coefficients);
            CHECK(norm <= previous + 1e-9);
            previous = norm;
        }

        // For grouped penalties the penalty-weighted seminorm shrinks when
        // the whole triple scales up.
        Vector base(q);
        for (std::size_t i = 0; i < q; ++i)
            base[i] = i < q / 3 ? 1e-3 : (i < 2 * q / 3 ? 1e-2 : 1e-1);
        const auto weighted_norm = [&](const Vector& a) {
            double s = 0.0;
            for (std::size_t i = 0; i < q; ++i) s += base[i] * a[i] * a[i];
            return std::sqrt(s);
        };
        previous = std::numeric_limits<double>::infinity();
        for (double scale : {1.0, 10.0, 100.0, 1000.0}) {
            Vector scaled = base;
            for (double& d : scaled) d *= scale;
            const auto fit = model::fit_coefficients(phi, g, scaled);
            const double norm = weighted_norm(fit.coefficients);
            CHECK(norm <= previous + 1e-9);
            previous = norm;
        }
    }
}

TEST_CASE("singular unregularized systems fall back to the minimum-norm solve") {
    Matrix phi(3, 2);
    for (std::size_t r = 0; r < 3; ++r) phi(r, 0) = phi(r, 1) = 1.0; // duplicate columns
    const Vector g{3.0, 3.0, 3.0};
    const auto fallback = model::fit_coefficients(phi, g, Vector{0.0, 0.0});
    CHECK(fallback.used_min_norm_fallback);
    CHECK(fallback.coefficients[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(fallback.coefficients[1] == doctest::Approx(1.5).epsilon(1e-12));
    const auto regularized = model::fit_coefficients(phi, g, Vector{1e-6, 1e-6});
    CHECK_FALSE(regularized.used_min_norm_fallback);
}

TEST_CASE("constant targets are fitted exactly by a constant-order model") {
    std::mt19937_64 gen(43);
    data::Dataset ds;
    ds.inputs = random_phi(gen, 40, 3);
    ds.targets.assign(40, 5.0);
    model::ModelConfig config;
    config.clusters = 4;
    config.order = Order::constant;
    config.seed = 9;
    const model::Model m = model::fit_model(ds, config);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(m.coefficients[i] == doctest::Approx(5.0).epsilon(1e-9));
    const auto pred = model::predict_all(m, ds.inputs);
    CHECK(metrics::rmse(ds.targets, pred) <= 1e-8);
}

TEST_CASE("a realizable quadratic is recovered to numerical precision") {
    const data::Dataset ds = quadratic_dataset(400, 51);
    model::ModelConfig config;
    config.clusters = 2;
    config.order = Order::quadratic;
    config.seed = 3;
    const model::Model m = model::fit_model(ds, config);
    const auto pred = model::predict_all(m, ds.inputs);
    CHECK(metrics::rmse(ds.targets, pred) <= 1e-6);

    std::mt19937_64 gen(99);
    for (int probe = 0; probe < 50; ++probe) {
        const double x1 = rng::unit_double(gen);
        const double x2 = rng::unit_double(gen);
        const double expected = generating_polynomial(x1, x2);
        CHECK(std::abs(model::predict(m, std::vector<double>{x1, x2}) - expected) <= 1e-5);
    }
}

TEST_CASE("fit_model is deterministic for a fixed seed") {
    const data::Dataset ds = quadratic_dataset(60, 4);
    model::ModelConfig config;
    config.clusters = 3;
    config.penalties = PenaltySpec{1e-4, 1e-3, 1e-2};
    config.seed = 1234;
    const model::Model a = model::fit_model(ds, config);
    const model::Model b = model::fit_model(ds, config);
    CHECK(a == b);
}

TEST_CASE("prediction averages rule outputs by membership") {
    const model::Model m = order0_model({1.0, 3.0});
    // Equidistant from both prototypes (0.25 and 0.75 in normalized space).
    CHECK(model::predict(m, std::vector<double>{0.5}) == doctest::Approx(2.0).epsilon(1e-12));

    // Single rule: output is that rule's polynomial exactly.
    const model::Model single = order0_model({7.25});
    CHECK(model::predict(single, std::vector<double>{0.123}) == 7.25);

    CHECK_THROWS_AS(model::predict(m, std::vector<double>{0.1, 0.2}), DimensionMismatch);
}

TEST_CASE("partition of unity makes equal constants exact everywhere") {
    const double beta = -3.75;
    const model::Model m = order0_model({beta, beta, beta, beta});
    std::mt19937_64 gen(7);
    for (int probe = 0; probe < 100; ++probe) {
        const double x = 2.0 * rng::unit_double(gen) - 0.5; // also outside [0,1]
        CHECK(std::abs(model::predict(m, std::vector<double>{x}) - beta) <=
              1e-12 * std::abs(beta));
    }
}

TEST_CASE("lssc sums squared non-constant coefficients") {
    model::Model m = order0_model({1.0, 2.0});
    m.order = Order::linear;
    m.coefficients = {5.0, 5.0, 0.6, 0.8}; // constants excluded; 0.36 + 0.64 = 1
    CHECK(model::lssc(m) == doctest::Approx(0.0).epsilon(1e-12));
    m.coefficients = {5.0, 5.0, std::sqrt(std::exp(1.0)), 0.0};
    CHECK(model::lssc(m) == doctest::Approx(1.0).epsilon(1e-12));
    m.coefficients = {5.0, 5.0, 0.0, 0.0};
    CHECK_THROWS_AS(model::lssc(m), DegenerateLssc);
    CHECK_THROWS_AS(model::lssc(order0_model({1.0, 2.0})), DegenerateLssc);
}

TEST_CASE("model JSON round-trip is exact") {
    const data::Dataset ds = quadratic_dataset(80, 21);
    model::ModelConfig config;
    config.clusters = 3;
    config.penalties = PenaltySpec{1e-8, 1e-6, 1e-4};
    config.seed = 5;
    const model::Model m = model::fit_model(ds, config);

    const auto dir = std::filesystem::temp_directory_path() / "fuzzreg_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / "model_roundtrip.json";
    model::save_model(m, path);
    const model::Model loaded = model::load_model(path);
    CHECK(loaded == m);

    std::mt19937_64 gen(17);
    for (int probe = 0; probe < 100; ++probe) {
        const std::vector<double> x{rng::unit_double(gen), rng::unit_double(gen)};
        CHECK(model::predict(loaded, x) == model::predict(m, x));
    }
}

TEST_CASE("model documents with unknown keys or foreign layouts are rejected") {
    const data::Dataset ds = quadratic_dataset(30, 2);
    model::ModelConfig config;
    config.clusters = 2;
    config.seed = 1;
    nlohmann::json j = model::to_json(model::fit_model(ds, config));
    nlohmann::json extra = j;
    extra["surprise"] = 1;
    CHECK_THROWS_AS(model::model_from_json(extra), ParseError);
    nlohmann::json foreign = j;
    foreign["column_layout"] = "something-else";
    CHECK_THROWS_AS(model::model_from_json(foreign), ParseError);
    nlohmann::json truncated = j;
    truncated.erase("coefficients");
    CHECK_THROWS_AS(model::model_from_json(truncated), ParseError);
}

} // TEST_SUITE
