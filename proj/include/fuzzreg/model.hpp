#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fuzzreg/dataio.hpp"
#include "fuzzreg/errors.hpp"
#include "fuzzreg/fcm.hpp"
#include "fuzzreg/linalg.hpp"
#include "fuzzreg/polynomial.hpp"

// The model core: fuzzy rules with polynomial consequents. Membership grades
// from the clustering partition weight each rule's polynomial; coefficients
// come from a closed-form regularized least-squares solve where the constant,
// linear, and quadratic coefficient groups carry separate penalties.

namespace fuzzreg::model {

/// Penalty weights for the three coefficient groups. Equal values realize
/// ordinary uniform ridge; all-zero realizes a plain least-squares fit.
struct PenaltySpec {
    double lambda1 = 0.0; // constant terms
    double lambda2 = 0.0; // linear terms
    double lambda3 = 0.0; // quadratic terms

    bool all_zero() const { return lambda1 == 0.0 && lambda2 == 0.0 && lambda3 == 0.0; }
    bool uniform() const { return lambda1 == lambda2 && lambda2 == lambda3; }

    /// The recommended strictly increasing ordering is advisory: violations
    /// produce a warning, never an error, so ridge and unregularized
    /// baselines run through the same path.
    std::optional<std::string> ordering_warning() const {
        if (lambda1 > 0.0 && lambda1 < lambda2 && lambda2 < lambda3) return std::nullopt;
        return "penalties (" + data::detail::format_double_shortest(lambda1) + ", " +
               data::detail::format_double_shortest(lambda2) + ", " +
               data::detail::format_double_shortest(lambda3) +
               ") do not satisfy 0 < lambda1 < lambda2 < lambda3";
    }

    friend bool operator==(const PenaltySpec&, const PenaltySpec&) = default;
};

struct ModelConfig {
    std::size_t clusters = 2;
    double fuzzifier = 2.0;
    poly::Order order = poly::Order::quadratic;
    PenaltySpec penalties;
    std::uint64_t seed = 0;
    std::size_t fcm_max_iterations = 300;
    double fcm_tolerance = 1e-6;
};

/// A fitted model: everything needed to evaluate new inputs.
struct Model {
    poly::Order order = poly::Order::quadratic;
    std::size_t input_dim = 0;
    double fuzzifier = 2.0;
    linalg::Matrix prototypes;      // clusters x input_dim, in normalized space
    linalg::Vector coefficients;    // clusters * term_count, rule index fastest
    data::Normalizer normalizer;    // fitted on training inputs only
    std::string column_layout{poly::kColumnLayout};
    bool used_min_norm_fallback = false;

    std::size_t clusters() const { return prototypes.rows(); }
    std::size_t terms_per_rule() const { return poly::term_count(input_dim, order); }

    friend bool operator==(const Model&, const Model&) = default;
};

/// Assembles the N x (clusters * term_count) design matrix. Column blocks
/// are ordered constant, then linear, then quadratic; within each term the
/// rule index varies fastest, matching the coefficient vector layout.
inline linalg::Matrix build_design_matrix(const linalg::Matrix& inputs,
                                          const linalg::Matrix& memberships,
                                          poly::Order order) {
    const std::size_t n_patterns = inputs.rows();
    const std::size_t c = memberships.rows();
    if (memberships.cols() != n_patterns)
        throw DimensionMismatch("build_design_matrix: memberships do not match patterns");
    for (std::size_t k = 0; k < n_patterns; ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < c; ++i) sum += memberships(i, k);
        if (std::abs(sum - 1.0) > 1e-6)
            throw InvalidArgument("build_design_matrix: membership column " +
                                  std::to_string(k) + " sums to " +
                                  data::detail::format_double_shortest(sum));
    }
    const std::size_t terms = poly::term_count(inputs.cols(), order);
    linalg::Matrix phi(n_patterns, c * terms);
    std::vector<double> term_values;
    for (std::size_t k = 0; k < n_patterns; ++k) {
        poly::expand_terms(inputs.row(k), order, term_values);
        auto row = phi.row(k);
        for (std::size_t p = 0; p < terms; ++p)
            for (std::size_t i = 0; i < c; ++i) row[p * c + i] = term_values[p] * memberships(i, k);
    }
    return phi;
}

/// Diagonal of the penalty matrix, following the design-matrix column
/// layout: lambda1 on the c constant columns, lambda2 on the n*c linear
/// columns, lambda3 on the remaining quadratic columns.
inline std::vector<double> build_penalty_diagonal(std::size_t clusters, std::size_t n_vars,
                                                  poly::Order order,
                                                  const PenaltySpec& penalties) {
    if (clusters < 1)
        throw InvalidArgument("build_penalty_diagonal: need at least one rule");
    if (penalties.lambda1 < 0.0 || penalties.lambda2 < 0.0 || penalties.lambda3 < 0.0)
        throw InvalidArgument("build_penalty_diagonal: penalties must be nonnegative");
    const std::size_t terms = poly::term_count(n_vars, order);
    std::vector<double> diagonal(clusters * terms, 0.0);
    for (std::size_t p = 0; p < terms; ++p) {
        double lambda = penalties.lambda1;
        switch (poly::term_group_of(p, n_vars, order)) {
        case poly::TermGroup::constant: lambda = penalties.lambda1; break;
        case poly::TermGroup::linear: lambda = penalties.lambda2; break;
        case poly::TermGroup::quadratic: lambda = penalties.lambda3; break;
        }
        for (std::size_t i = 0; i < clusters; ++i) diagonal[p * clusters + i] = lambda;
    }
    return diagonal;
}

struct CoefficientFit {
    linalg::Vector coefficients;
    bool used_min_norm_fallback = false;
};

/// Minimizes ||phi*A - targets||^2 + A^T diag(penalty) A in closed form via
/// the normal equations and a symmetric positive-definite factorization
/// (with iterative refinement). When that path fails -- the diagonal is all
/// zero and the Gram matrix singular -- the solve falls back to the
/// minimum-norm least-squares solution of the equivalent augmented system
/// and flags it.
inline CoefficientFit fit_coefficients(const linalg::Matrix& phi,
                                       std::span<const double> targets,
                                       std::span<const double> diagonal) {
    if (targets.size() != phi.rows())
        throw DimensionMismatch("fit_coefficients: target length does not match rows");
    if (diagonal.size() != phi.cols())
        throw DimensionMismatch("fit_coefficients: diagonal length does not match columns");

    linalg::Matrix normal = linalg::gram(phi);
    for (std::size_t i = 0; i < diagonal.size(); ++i) normal(i, i) += diagonal[i];
    const linalg::Vector rhs = linalg::matvec_transposed(phi, targets);
    const double rhs_scale = std::max(1.0, linalg::norm2(rhs));

    const auto residual_norm = [&](const linalg::Vector& x) {
        linalg::Vector r = linalg::matvec(normal, x);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
        return linalg::norm2(r);
    };

    try {
        const linalg::CholeskyFactor factor(normal);
        linalg::Vector x = factor.solve(rhs);
        for (int pass = 0; pass < 2 && residual_norm(x) > 1e-9 * rhs_scale; ++pass) {
            linalg::Vector r = linalg::matvec(normal, x);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
            const linalg::Vector dx = factor.solve(r);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
        }
        if (residual_norm(x) <= 1e-9 * rhs_scale) return {std::move(x), false};
    } catch (const NotPositiveDefinite&) {
        // fall through to the least-squares path
    }

    // Augmented rows sqrt(d_i) * e_i reproduce the penalty exactly, so the
    // minimum-norm solve covers both the singular unregularized case and any
    // pathologically conditioned regularized case.
    const std::size_t q = phi.cols();
    linalg::Matrix augmented(phi.rows() + q, q);
    for (std::size_t r = 0; r < phi.rows(); ++r) {
        const auto src = phi.row(r);
        std::copy(src.begin(), src.end(), augmented.row(r).begin());
    }
    for (std::size_t i = 0; i < q; ++i) augmented(phi.rows() + i, i) = std::sqrt(diagonal[i]);
    linalg::Vector extended(phi.rows() + q, 0.0);
    std::copy(targets.begin(), targets.end(), extended.begin());
    return {linalg::min_norm_lstsq(augmented, extended), true};
}

/// Full training pipeline: normalize inputs, cluster, assemble the design
/// matrix, and solve for the consequent coefficients.
inline Model fit_model(const data::Dataset& train, const ModelConfig& config) {
    if (train.input_dim() < 1)
        throw InvalidArgument("fit_model: need at least one input variable");
    for (double t : train.targets)
        if (!std::isfinite(t)) throw InvalidArgument("fit_model: targets must be finite");

    Model model;
    model.order = config.order;
    model.input_dim = train.input_dim();
    model.fuzzifier = config.fuzzifier;
    model.normalizer = data::fit_normalizer(train.inputs);

    const linalg::Matrix scaled = data::apply_normalizer(model.normalizer, train.inputs);
    fcm::Config fcm_config;
    fcm_config.clusters = config.clusters;
    fcm_config.fuzzifier = config.fuzzifier;
    fcm_config.max_iterations = config.fcm_max_iterations;
    fcm_config.tolerance = config.fcm_tolerance;
    fcm_config.seed = config.seed;
    fcm::Partition partition = fcm::fit(scaled, fcm_config);

    const linalg::Matrix phi =
        build_design_matrix(scaled, partition.memberships, config.order);
    const std::vector<double> diagonal = build_penalty_diagonal(
        config.clusters, train.input_dim(), config.order, config.penalties);
    CoefficientFit fit = fit_coefficients(phi, train.targets, diagonal);

    model.prototypes = std::move(partition.prototypes);
    model.coefficients = std::move(fit.coefficients);
    model.used_min_norm_fallback = fit.used_min_norm_fallback;
    return model;
}

/// Model output at a point: membership-weighted sum of the per-rule
/// polynomials, evaluated in normalized input space.
inline double predict(const Model& model, std::span<const double> x) {
    if (x.size() != model.input_dim)
        throw DimensionMismatch("predict: input dimension mismatch");
    const std::vector<double> scaled = data::apply_normalizer(model.normalizer, x);
    const std::vector<double> weights =
        fcm::membership_of(scaled, model.prototypes, model.fuzzifier);
    const std::vector<double> terms = poly::expand_terms(scaled, model.order);
    const std::size_t c = model.clusters();
    double out = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        double rule_value = 0.0;
        for (std::size_t p = 0; p < terms.size(); ++p)
            rule_value += model.coefficients[p * c + i] * terms[p];
        out += weights[i] * rule_value;
    }
    return out;
}

inline std::vector<double> predict_all(const Model& model, const linalg::Matrix& inputs) {
    std::vector<double> out(inputs.rows(), 0.0);
    for (std::size_t r = 0; r < inputs.rows(); ++r) out[r] = predict(model, inputs.row(r));
    return out;
}

/// Natural log of the sum of squared non-constant coefficients, a shrinkage
/// diagnostic. The constant coefficients are excluded; when nothing remains
/// (or everything is zero) the logarithm is undefined and DegenerateLssc is
/// raised rather than returning -inf.
inline double lssc(const Model& model) {
    const std::size_t c = model.clusters();
    const std::size_t terms = model.terms_per_rule();
    double sum = 0.0;
    for (std::size_t p = 1; p < terms; ++p)
        for (std::size_t i = 0; i < c; ++i) {
            const double a = model.coefficients[p * c + i];
            sum += a * a;
        }
    if (sum == 0.0)
        throw DegenerateLssc("lssc: sum of squared non-constant coefficients is zero");
    return std::log(sum);
}

} // namespace fuzzreg::model
