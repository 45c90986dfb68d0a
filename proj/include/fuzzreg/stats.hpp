#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fuzzreg/errors.hpp"
#include "fuzzreg/format.hpp"
#include "fuzzreg/linalg.hpp"

// Nonparametric model comparison: average ranks with tie averaging, the
// Friedman test statistics, and the Bonferroni-Dunn critical difference.

namespace fuzzreg::stats {

/// Ascending ranks (1 = smallest error) with tied entries receiving the
/// average of the positions they span.
inline std::vector<double> rank_row(std::span<const double> errors) {
    for (double e : errors)
        if (!std::isfinite(e)) throw InvalidArgument("rank_row: values must be finite");
    const std::size_t m = errors.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return errors[a] < errors[b]; });
    std::vector<double> ranks(m, 0.0);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j + 1 < m && errors[order[j + 1]] == errors[order[i]]) ++j;
        const double avg = static_cast<double>(i + j + 2) / 2.0; // positions are 1-based
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

struct RankTable {
    std::vector<std::string> models;
    std::vector<std::string> datasets;
    linalg::Matrix errors; // datasets x models
    linalg::Matrix ranks;  // datasets x models
    std::vector<double> avg_ranks;
};

inline RankTable make_rank_table(std::vector<std::string> models,
                                 std::vector<std::string> datasets,
                                 const linalg::Matrix& errors) {
    if (errors.rows() != datasets.size() || errors.cols() != models.size())
        throw DimensionMismatch("make_rank_table: error matrix shape mismatch");
    RankTable table;
    table.errors = errors;
    table.ranks = linalg::Matrix(errors.rows(), errors.cols());
    table.avg_ranks.assign(models.size(), 0.0);
    for (std::size_t d = 0; d < errors.rows(); ++d) {
        const std::vector<double> r = rank_row(errors.row(d));
        for (std::size_t m = 0; m < r.size(); ++m) {
            table.ranks(d, m) = r[m];
            table.avg_ranks[m] += r[m];
        }
    }
    for (double& r : table.avg_ranks) r /= static_cast<double>(errors.rows());
    table.models = std::move(models);
    table.datasets = std::move(datasets);
    return table;
}

struct FriedmanResult {
    double chi_squared = 0.0;
    double f_statistic = 0.0;
    std::size_t df1 = 0;
    std::size_t df2 = 0;
};

/// The Friedman chi-squared statistic from pre-averaged ranks over D
/// datasets.
inline double friedman_chi_squared(std::span<const double> avg_ranks,
                                   std::size_t dataset_count) {
    const std::size_t m = avg_ranks.size();
    if (m < 2)
        throw InvalidArgument("friedman: need at least two models");
    if (dataset_count < 2)
        throw InvalidArgument("friedman: need at least two datasets");
    const double md = static_cast<double>(m);
    const double dd = static_cast<double>(dataset_count);
    double sum_sq = 0.0;
    for (double r : avg_ranks) sum_sq += r * r;
    return 12.0 * dd / (md * (md + 1.0)) * (sum_sq - md * (md + 1.0) * (md + 1.0) / 4.0);
}

/// Friedman chi-squared and its F refinement from pre-averaged ranks over D
/// datasets. It reports the statistics only; the critical value for the
/// significance decision is supplied externally.
inline FriedmanResult friedman(std::span<const double> avg_ranks, std::size_t dataset_count) {
    const std::size_t m = avg_ranks.size();
    FriedmanResult result;
    result.chi_squared = friedman_chi_squared(avg_ranks, dataset_count);
    const double dd = static_cast<double>(dataset_count);
    const double md = static_cast<double>(m);
    const double denom = dd * (md - 1.0) - result.chi_squared;
    if (denom <= 0.0)
        throw DegenerateStatistic("friedman: F denominator is zero (chi-squared reached its maximum)");
    result.f_statistic = (dd - 1.0) * result.chi_squared / denom;
    result.df1 = m - 1;
    result.df2 = (m - 1) * (dataset_count - 1);
    return result;
}

/// Overload taking the full datasets x models error matrix; ranks are
/// computed per row and averaged.
inline FriedmanResult friedman(const linalg::Matrix& errors) {
    if (errors.cols() < 2 || errors.rows() < 2)
        throw InvalidArgument("friedman: need at least two models and two datasets");
    std::vector<double> avg(errors.cols(), 0.0);
    for (std::size_t d = 0; d < errors.rows(); ++d) {
        const std::vector<double> r = rank_row(errors.row(d));
        for (std::size_t m = 0; m < r.size(); ++m) avg[m] += r[m];
    }
    for (double& r : avg) r /= static_cast<double>(errors.rows());
    return friedman(avg, errors.rows());
}

/// Inverse standard normal CDF. Rational approximation (Acklam) polished
/// with one Halley step against erfc; absolute error is well below 1e-8.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw InvalidArgument("normal_quantile: p must lie strictly between 0 and 1");
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    constexpr double sqrt_two_pi = 2.506628274631000502;
    const double err = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = err * sqrt_two_pi * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

/// Bonferroni-Dunn critical difference for comparing M-1 models against one
/// control over D datasets: q * sqrt(M(M+1)/(6D)) with q the two-tailed
/// normal quantile at alpha/(2(M-1)).
inline double bonferroni_dunn_cd(std::size_t models, std::size_t datasets, double alpha) {
    if (models < 2)
        throw InvalidArgument("bonferroni_dunn_cd: need at least two models");
    if (datasets < 1)
        throw InvalidArgument("bonferroni_dunn_cd: need at least one dataset");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidArgument("bonferroni_dunn_cd: alpha must lie strictly between 0 and 1");
    const double md = static_cast<double>(models);
    const double q = normal_quantile(1.0 - alpha / (2.0 * (md - 1.0)));
    return q * std::sqrt(md * (md + 1.0) / (6.0 * static_cast<double>(datasets)));
}

/// CSV export of a control comparison: model, avg_rank, diff_vs_control,
/// exceeds_cd (one row per model, control first column diff 0).
inline void write_comparison_csv(std::ostream& out, std::span<const std::string> models,
                                 std::span<const double> avg_ranks, std::size_t control_index,
                                 double cd) {
    if (models.size() != avg_ranks.size() || control_index >= models.size())
        throw DimensionMismatch("write_comparison_csv: shape mismatch");
    out << "model,avg_rank,diff_vs_control,exceeds_cd\n";
    for (std::size_t m = 0; m < models.size(); ++m) {
        const double diff = avg_ranks[m] - avg_ranks[control_index];
        const bool exceeds = m != control_index && diff >= cd;
        out << models[m] << ',' << detail::format_double_shortest(avg_ranks[m]) << ','
            << detail::format_double_shortest(diff) << ',' << (exceeds ? "true" : "false")
            << '\n';
    }
}

} // namespace fuzzreg::stats
