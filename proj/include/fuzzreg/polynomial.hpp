#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fuzzreg/errors.hpp"

// Polynomial term expansion for rule consequents, plus the bookkeeping that
// maps every term index to its penalty group (constant / linear / quadratic).

namespace fuzzreg::poly {

/// Consequent polynomial order: constant, linear, or full quadratic.
enum class Order { constant = 0, linear = 1, quadratic = 2 };

inline Order order_from_int(int value) {
    if (value < 0 || value > 2)
        throw InvalidArgument("polynomial order must be 0, 1, or 2");
    return static_cast<Order>(value);
}

inline int order_to_int(Order order) { return static_cast<int>(order); }

enum class TermGroup { constant, linear, quadratic };

/// Number of terms for one rule: 1 for constant, n+1 for linear, and
/// (n^2 + 3n + 2)/2 for quadratic (one cross term per unordered pair).
inline std::size_t term_count(std::size_t n_vars, Order order) {
    if (n_vars < 1)
        throw InvalidArgument("term_count: need at least one input variable");
    switch (order) {
    case Order::constant: return 1;
    case Order::linear: return n_vars + 1;
    case Order::quadratic: return (n_vars * n_vars + 3 * n_vars + 2) / 2;
    }
    throw InvalidArgument("term_count: unknown order");
}

/// Canonical term expansion of an input vector. The ordering is a frozen
/// serialization contract (kColumnLayout below):
///   1, x1, ..., xn, x1*x1, x1*x2, ..., x1*xn, x2*x2, ..., xn*xn
/// i.e. cross terms iterate pairs (j, s) with j <= s, j-major.
inline void expand_terms(std::span<const double> x, Order order, std::vector<double>& out) {
    const std::size_t n = x.size();
    out.clear();
    out.reserve(term_count(n, order));
    out.push_back(1.0);
    if (order == Order::constant) return;
    for (std::size_t j = 0; j < n; ++j) out.push_back(x[j]);
    if (order == Order::linear) return;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t s = j; s < n; ++s) out.push_back(x[j] * x[s]);
}

inline std::vector<double> expand_terms(std::span<const double> x, Order order) {
    std::vector<double> out;
    expand_terms(x, order, out);
    return out;
}

/// Penalty group of a term index: 0 is constant, 1..n are linear, the rest
/// quadratic.
inline TermGroup term_group_of(std::size_t index, std::size_t n_vars, Order order) {
    if (index >= term_count(n_vars, order))
        throw IndexOutOfRange("term_group_of: index " + std::to_string(index) +
                              " out of range");
    if (index == 0) return TermGroup::constant;
    if (index <= n_vars) return TermGroup::linear;
    return TermGroup::quadratic;
}

/// Version tag for the term ordering and design-matrix column layout.
/// Bump if the canonical ordering above ever changes.
inline constexpr std::string_view kColumnLayout = "constant,linear,quadratic;rule-fastest;v1";

} // namespace fuzzreg::poly
