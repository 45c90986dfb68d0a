#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fuzzreg/errors.hpp"

// Error metrics and per-fold summaries (mean and sample standard deviation).

namespace fuzzreg::metrics {

enum class Metric { rmse, mse, half_mse };

inline std::string_view metric_name(Metric m) {
    switch (m) {
    case Metric::rmse: return "rmse";
    case Metric::mse: return "mse";
    case Metric::half_mse: return "half_mse";
    }
    return "unknown";
}

inline Metric metric_from_name(std::string_view name) {
    if (name == "rmse") return Metric::rmse;
    if (name == "mse") return Metric::mse;
    if (name == "half_mse") return Metric::half_mse;
    throw InvalidArgument("unknown metric: " + std::string(name));
}

namespace detail {
inline double mean_squared_residual(std::span<const double> actual,
                                    std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw LengthMismatch("metric: vectors differ in length");
    if (actual.empty())
        throw LengthMismatch("metric: vectors must be nonempty");
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double r = actual[i] - predicted[i];
        s += r * r;
    }
    return s / static_cast<double>(actual.size());
}
} // namespace detail

inline double mse(std::span<const double> actual, std::span<const double> predicted) {
    return detail::mean_squared_residual(actual, predicted);
}

inline double rmse(std::span<const double> actual, std::span<const double> predicted) {
    return std::sqrt(detail::mean_squared_residual(actual, predicted));
}

inline double half_mse(std::span<const double> actual, std::span<const double> predicted) {
    return 0.5 * detail::mean_squared_residual(actual, predicted);
}

inline double evaluate(Metric metric, std::span<const double> actual,
                       std::span<const double> predicted) {
    switch (metric) {
    case Metric::rmse: return rmse(actual, predicted);
    case Metric::mse: return mse(actual, predicted);
    case Metric::half_mse: return half_mse(actual, predicted);
    }
    throw InvalidArgument("evaluate: unknown metric");
}

struct ErrorSummary {
    Metric metric = Metric::rmse;
    std::vector<double> per_fold;
    double mean = 0.0;
    double std = 0.0;          // sample standard deviation (divisor k-1)
    bool std_degenerate = false; // true when fewer than two folds
};

inline ErrorSummary summarize(std::vector<double> per_fold, Metric metric) {
    if (per_fold.empty())
        throw InvalidArgument("summarize: need at least one value");
    ErrorSummary s;
    s.metric = metric;
    double total = 0.0;
    for (double v : per_fold) total += v;
    s.mean = total / static_cast<double>(per_fold.size());
    if (per_fold.size() < 2) {
        s.std = 0.0;
        s.std_degenerate = true;
    } else {
        double ss = 0.0;
        for (double v : per_fold) {
            const double d = v - s.mean;
            ss += d * d;
        }
        s.std = std::sqrt(ss / static_cast<double>(per_fold.size() - 1));
    }
    s.per_fold = std::move(per_fold);
    return s;
}

} // namespace fuzzreg::metrics
