#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "fuzzreg/errors.hpp"
#include "fuzzreg/linalg.hpp"
#include "fuzzreg/random.hpp"

// Fuzzy c-means partitioning of the input space. The membership grades it
// produces serve directly as rule matching degrees downstream.

namespace fuzzreg::fcm {

struct Config {
    std::size_t clusters = 2;
    double fuzzifier = 2.0; // must be > 1
    std::size_t max_iterations = 300;
    double tolerance = 1e-6; // on the largest membership change
    std::uint64_t seed = 0;
};

struct Partition {
    linalg::Matrix prototypes;  // clusters x n_vars
    linalg::Matrix memberships; // clusters x n_patterns, columns sum to 1
    double final_loss = 0.0;
    std::size_t iterations_run = 0;
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline void validate_fuzzifier(double m) {
    if (!(m > 1.0))
        throw InvalidArgument("fuzzifier must be greater than 1");
}

/// Membership column for one point given its squared distances to every
/// prototype. A point coinciding with a prototype gets unit mass on the
/// first such cluster.
inline void membership_column(std::span<const double> sq_dist, double fuzzifier,
                              std::span<double> out) {
    const std::size_t c = sq_dist.size();
    for (std::size_t i = 0; i < c; ++i) {
        if (sq_dist[i] == 0.0) {
            for (std::size_t j = 0; j < c; ++j) out[j] = 0.0;
            out[i] = 1.0;
            return;
        }
    }
    const double expo = 1.0 / (fuzzifier - 1.0);
    for (std::size_t i = 0; i < c; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j)
            sum += std::pow(sq_dist[i] / sq_dist[j], expo);
        out[i] = 1.0 / sum; // sum >= 1, so this never divides by zero
    }
}

} // namespace detail

/// Clustering loss: sum over clusters and patterns of u^m times the squared
/// Euclidean distance between pattern and prototype.
inline double loss(const linalg::Matrix& inputs, const linalg::Matrix& prototypes,
                   const linalg::Matrix& memberships, double fuzzifier) {
    detail::validate_fuzzifier(fuzzifier);
    if (prototypes.cols() != inputs.cols() || memberships.rows() != prototypes.rows() ||
        memberships.cols() != inputs.rows())
        throw DimensionMismatch("fcm loss: inputs, prototypes, and memberships disagree");
    double total = 0.0;
    for (std::size_t i = 0; i < prototypes.rows(); ++i) {
        for (std::size_t k = 0; k < inputs.rows(); ++k) {
            const double u = memberships(i, k);
            if (u == 0.0) continue;
            total += std::pow(u, fuzzifier) *
                     detail::squared_distance(inputs.row(k), prototypes.row(i));
        }
    }
    return total;
}

inline double loss(const linalg::Matrix& inputs, const Partition& partition,
                   double fuzzifier) {
    return loss(inputs, partition.prototypes, partition.memberships, fuzzifier);
}

/// One membership update pass. Every returned column sums to 1.
inline linalg::Matrix update_memberships(const linalg::Matrix& inputs,
                                         const linalg::Matrix& prototypes,
                                         double fuzzifier) {
    detail::validate_fuzzifier(fuzzifier);
    if (prototypes.cols() != inputs.cols())
        throw DimensionMismatch("update_memberships: prototype dimension mismatch");
    const std::size_t c = prototypes.rows();
    const std::size_t n_patterns = inputs.rows();
    linalg::Matrix u(c, n_patterns);
    std::vector<double> sq_dist(c, 0.0);
    std::vector<double> column(c, 0.0);
    for (std::size_t k = 0; k < n_patterns; ++k) {
        for (std::size_t i = 0; i < c; ++i)
            sq_dist[i] = detail::squared_distance(inputs.row(k), prototypes.row(i));
        detail::membership_column(sq_dist, fuzzifier, column);
        for (std::size_t i = 0; i < c; ++i) u(i, k) = column[i];
    }
    return u;
}

/// One prototype update pass: each prototype becomes the u^m-weighted mean
/// of the data. Throws EmptyCluster when a cluster has zero total weight.
inline linalg::Matrix update_prototypes(const linalg::Matrix& inputs,
                                        const linalg::Matrix& memberships,
                                        double fuzzifier) {
    detail::validate_fuzzifier(fuzzifier);
    if (memberships.cols() != inputs.rows())
        throw DimensionMismatch("update_prototypes: membership columns must match patterns");
    const std::size_t c = memberships.rows();
    const std::size_t n_vars = inputs.cols();
    linalg::Matrix prototypes(c, n_vars);
    for (std::size_t i = 0; i < c; ++i) {
        double weight_sum = 0.0;
        for (std::size_t k = 0; k < inputs.rows(); ++k) {
            const double w = std::pow(memberships(i, k), fuzzifier);
            weight_sum += w;
            const auto x = inputs.row(k);
            for (std::size_t j = 0; j < n_vars; ++j) prototypes(i, j) += w * x[j];
        }
        if (weight_sum <= 0.0)
            throw EmptyCluster(i, "update_prototypes: cluster " + std::to_string(i) +
                                      " has zero total weight");
        for (std::size_t j = 0; j < n_vars; ++j) prototypes(i, j) /= weight_sum;
    }
    return prototypes;
}

/// Membership vector of a single point against trained prototypes; used at
/// prediction time. Sums to 1.
inline std::vector<double> membership_of(std::span<const double> x,
                                         const linalg::Matrix& prototypes,
                                         double fuzzifier) {
    detail::validate_fuzzifier(fuzzifier);
    if (x.size() != prototypes.cols())
        throw DimensionMismatch("membership_of: point dimension mismatch");
    const std::size_t c = prototypes.rows();
    std::vector<double> sq_dist(c, 0.0);
    for (std::size_t i = 0; i < c; ++i)
        sq_dist[i] = detail::squared_distance(x, prototypes.row(i));
    std::vector<double> out(c, 0.0);
    detail::membership_column(sq_dist, fuzzifier, out);
    return out;
}

namespace detail {

/// Prototype update used inside fit(): clusters that end up with zero total
/// weight are re-seeded at the data point worst served by the current
/// prototypes, keeping the cluster count fixed.
inline linalg::Matrix update_prototypes_with_repair(const linalg::Matrix& inputs,
                                                    const linalg::Matrix& memberships,
                                                    const linalg::Matrix& current_prototypes,
                                                    double fuzzifier) {
    const std::size_t c = memberships.rows();
    const std::size_t n_vars = inputs.cols();
    linalg::Matrix prototypes(c, n_vars);
    std::vector<std::size_t> empty;
    for (std::size_t i = 0; i < c; ++i) {
        double weight_sum = 0.0;
        for (std::size_t k = 0; k < inputs.rows(); ++k) {
            const double w = std::pow(memberships(i, k), fuzzifier);
            weight_sum += w;
            const auto x = inputs.row(k);
            for (std::size_t j = 0; j < n_vars; ++j) prototypes(i, j) += w * x[j];
        }
        if (weight_sum <= 0.0) {
            empty.push_back(i);
            continue;
        }
        for (std::size_t j = 0; j < n_vars; ++j) prototypes(i, j) /= weight_sum;
    }
    for (std::size_t idx = 0; idx < empty.size(); ++idx) {
        // Worst-fit point: largest distance to its nearest current prototype.
        std::size_t worst = 0;
        double worst_dist = -1.0;
        for (std::size_t k = 0; k < inputs.rows(); ++k) {
            double nearest = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < c; ++i)
                nearest = std::min(nearest, squared_distance(inputs.row(k),
                                                             current_prototypes.row(i)));
            if (nearest > worst_dist) {
                worst_dist = nearest;
                worst = k;
            }
        }
        const auto x = inputs.row(worst);
        for (std::size_t j = 0; j < n_vars; ++j) prototypes(empty[idx], j) = x[j];
    }
    return prototypes;
}

} // namespace detail

/// Runs the alternating membership/prototype updates from a seeded
/// initialization (prototypes drawn at distinct data indices) until the
/// largest membership change drops to the tolerance or the iteration cap is
/// reached. Deterministic for a fixed seed.
inline Partition fit(const linalg::Matrix& inputs, const Config& config) {
    detail::validate_fuzzifier(config.fuzzifier);
    if (config.clusters < 1)
        throw InvalidArgument("fcm fit: need at least one cluster");
    const std::size_t n_patterns = inputs.rows();
    const std::size_t c = config.clusters;
    if (n_patterns < c)
        throw InsufficientData("fcm fit: fewer patterns (" + std::to_string(n_patterns) +
                               ") than clusters (" + std::to_string(c) + ")");
    if (!inputs.all_finite())
        throw InvalidArgument("fcm fit: inputs must be finite");

    // Partial Fisher-Yates draw of c distinct data indices.
    std::mt19937_64 gen(config.seed);
    std::vector<std::size_t> indices(n_patterns);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    for (std::size_t i = 0; i < c; ++i) {
        const std::size_t j = i + rng::uniform_index(gen, n_patterns - i);
        std::swap(indices[i], indices[j]);
    }
    linalg::Matrix prototypes(c, inputs.cols());
    for (std::size_t i = 0; i < c; ++i) {
        const auto x = inputs.row(indices[i]);
        std::copy(x.begin(), x.end(), prototypes.row(i).begin());
    }

    linalg::Matrix memberships = update_memberships(inputs, prototypes, config.fuzzifier);
    std::size_t iterations = 0;
    for (std::size_t it = 1; it <= config.max_iterations; ++it) {
        prototypes = detail::update_prototypes_with_repair(inputs, memberships, prototypes,
                                                           config.fuzzifier);
        linalg::Matrix next = update_memberships(inputs, prototypes, config.fuzzifier);
        double delta = 0.0;
        for (std::size_t i = 0; i < next.entries().size(); ++i)
            delta = std::max(delta,
                             std::abs(next.entries()[i] - memberships.entries()[i]));
        memberships = std::move(next);
        iterations = it;
        if (delta <= config.tolerance) break;
    }

    Partition partition;
    partition.final_loss = loss(inputs, prototypes, memberships, config.fuzzifier);
    partition.prototypes = std::move(prototypes);
    partition.memberships = std::move(memberships);
    partition.iterations_run = iterations;
    return partition;
}

} // namespace fuzzreg::fcm
