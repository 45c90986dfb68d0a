#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fuzzreg/errors.hpp"
#include "fuzzreg/format.hpp"
#include "fuzzreg/linalg.hpp"
#include "fuzzreg/random.hpp"

// Data acquisition: synthetic benchmark generation, KEEL .dat parsing,
// min-max normalization, and k-fold splitting.

namespace fuzzreg::data {

struct Dataset {
    std::string name;
    linalg::Matrix inputs; // n_patterns x n_vars
    linalg::Vector targets;

    std::size_t pattern_count() const { return inputs.rows(); }
    std::size_t input_dim() const { return inputs.cols(); }
};

namespace detail {

using fuzzreg::detail::format_double_17g;
using fuzzreg::detail::format_double_shortest;

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return out;
}

inline std::vector<std::string> split_commas(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t pos = s.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(trim(s.substr(start)));
            break;
        }
        out.emplace_back(trim(s.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

inline double parse_field(std::string_view field, std::size_t line_no) {
    const std::string_view t = trim(field);
    if (t.empty())
        throw ParseError("missing field at line " + std::to_string(line_no), line_no);
    if (t == "?")
        throw ParseError("missing value '?' at line " + std::to_string(line_no) +
                             " (missing values are unsupported)",
                         line_no);
    double value = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || !std::isfinite(value))
        throw ParseError("non-numeric field '" + std::string(t) + "' at line " +
                             std::to_string(line_no),
                         line_no);
    return value;
}

} // namespace detail

/// The two-variable nonlinear benchmark function on [0,1]^2.
inline double synthetic_target(double x1, double x2) {
    return 1.9 * (1.35 + std::exp(x1) * std::exp(x2) *
                             std::sin(13.0 * (x2 - 0.6) * (x2 - 0.6)) * std::sin(7.0 * x1));
}

/// Draws `count` points uniformly on [0,1]^2 and evaluates the benchmark
/// function. Deterministic per seed.
inline Dataset generate_synthetic(std::size_t count, std::uint64_t seed) {
    if (count < 1)
        throw InvalidArgument("generate_synthetic: count must be at least 1");
    std::mt19937_64 gen(seed);
    Dataset ds;
    ds.name = "synthetic";
    ds.inputs = linalg::Matrix(count, 2);
    ds.targets.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double x1 = rng::unit_double(gen);
        const double x2 = rng::unit_double(gen);
        ds.inputs(k, 0) = x1;
        ds.inputs(k, 1) = x2;
        ds.targets[k] = synthetic_target(x1, x2);
    }
    return ds;
}

/// Writes the synthetic dataset as CSV with header "x1,x2,y", one row per
/// sample, 17 significant digits.
inline void save_synthetic_csv(const Dataset& ds, const std::filesystem::path& path) {
    if (ds.input_dim() != 2)
        throw InvalidArgument("save_synthetic_csv: expects exactly two input variables");
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << "x1,x2,y\n";
    for (std::size_t k = 0; k < ds.pattern_count(); ++k) {
        out << detail::format_double_17g(ds.inputs(k, 0)) << ','
            << detail::format_double_17g(ds.inputs(k, 1)) << ','
            << detail::format_double_17g(ds.targets[k]) << '\n';
    }
    if (!out)
        throw IoError("write failed for " + path.string());
}

/// Parses a KEEL .dat file: @relation/@attribute/@inputs/@outputs header
/// followed by @data with comma-separated numeric rows. '%' lines are
/// comments; keywords are case-insensitive. The @outputs attribute becomes
/// the target, the remaining declared attributes the inputs, in file order.
/// Nominal attributes and missing values are rejected, never dropped.
inline Dataset load_keel(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());

    std::vector<std::string> attribute_names;
    std::vector<std::string> input_names;
    std::optional<std::string> output_name;
    std::string relation;
    bool in_data = false;
    std::vector<std::vector<double>> rows;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '%') continue;

        if (!in_data && line.front() == '@') {
            const std::size_t sp = line.find_first_of(" \t");
            const std::string keyword =
                detail::lower(line.substr(0, sp == std::string_view::npos ? line.size() : sp));
            const std::string_view rest =
                sp == std::string_view::npos ? std::string_view{} : detail::trim(line.substr(sp));
            if (keyword == "@relation") {
                relation = std::string(rest);
            } else if (keyword == "@attribute") {
                const std::size_t name_end = rest.find_first_of(" \t{");
                if (name_end == std::string_view::npos || name_end == 0)
                    throw ParseError("malformed @attribute at line " + std::to_string(line_no),
                                     line_no);
                const std::string name(detail::trim(rest.substr(0, name_end)));
                const std::string_view type_spec = detail::trim(rest.substr(name_end));
                if (type_spec.empty() || type_spec.front() == '{')
                    throw NonNumericAttribute("attribute '" + name +
                                              "' is nominal; only numeric attributes are supported");
                const std::string type_lower = detail::lower(type_spec);
                if (type_lower.rfind("real", 0) != 0 && type_lower.rfind("integer", 0) != 0 &&
                    type_lower.rfind("numeric", 0) != 0)
                    throw NonNumericAttribute("attribute '" + name + "' has unsupported type '" +
                                              std::string(type_spec) + "'");
                attribute_names.push_back(name);
            } else if (keyword == "@inputs" || keyword == "@input") {
                input_names = detail::split_commas(rest);
            } else if (keyword == "@outputs" || keyword == "@output") {
                const auto outs = detail::split_commas(rest);
                if (outs.size() != 1)
                    throw ParseError("exactly one output attribute is required (line " +
                                         std::to_string(line_no) + ")",
                                     line_no);
                output_name = outs.front();
            } else if (keyword == "@data") {
                in_data = true;
            } else {
                throw ParseError("unknown directive '" + keyword + "' at line " +
                                     std::to_string(line_no),
                                 line_no);
            }
            continue;
        }
        if (!in_data)
            throw ParseError("data row before @data at line " + std::to_string(line_no), line_no);

        const auto fields = detail::split_commas(line);
        if (fields.size() != attribute_names.size())
            throw ParseError("expected " + std::to_string(attribute_names.size()) +
                                 " fields but found " + std::to_string(fields.size()) +
                                 " at line " + std::to_string(line_no),
                             line_no);
        std::vector<double> row(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i)
            row[i] = detail::parse_field(fields[i], line_no);
        rows.push_back(std::move(row));
    }

    if (attribute_names.empty())
        throw ParseError("no @attribute declarations in " + path.string());
    if (rows.empty())
        throw ParseError("no data rows in " + path.string());

    const auto find_attr = [&](const std::string& name) {
        const auto it = std::find(attribute_names.begin(), attribute_names.end(), name);
        if (it == attribute_names.end())
            throw ParseError("attribute '" + name + "' referenced but never declared");
        return static_cast<std::size_t>(it - attribute_names.begin());
    };

    // Falls back to the last declared attribute when @outputs is absent.
    const std::size_t target_col =
        output_name ? find_attr(*output_name) : attribute_names.size() - 1;

    std::vector<std::size_t> input_cols;
    if (!input_names.empty()) {
        for (const auto& name : input_names) {
            const std::size_t col = find_attr(name);
            if (col == target_col)
                throw ParseError("attribute '" + name + "' is declared both input and output");
            input_cols.push_back(col);
        }
    } else {
        for (std::size_t i = 0; i < attribute_names.size(); ++i)
            if (i != target_col) input_cols.push_back(i);
    }
    if (input_cols.empty())
        throw ParseError("no input attributes remain in " + path.string());

    Dataset ds;
    ds.name = relation.empty() ? path.stem().string() : relation;
    ds.inputs = linalg::Matrix(rows.size(), input_cols.size());
    ds.targets.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t j = 0; j < input_cols.size(); ++j)
            ds.inputs(r, j) = rows[r][input_cols[j]];
        ds.targets[r] = rows[r][target_col];
    }
    return ds;
}

/// Writes a dataset in KEEL .dat form with generated attribute names
/// (x1..xn, y). load_keel(save_keel(ds)) is value-identical to ds.
inline void save_keel(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << "@relation " << (ds.name.empty() ? std::string("dataset") : ds.name) << '\n';
    for (std::size_t j = 0; j < ds.input_dim(); ++j)
        out << "@attribute x" << (j + 1) << " real\n";
    out << "@attribute y real\n";
    out << "@inputs";
    for (std::size_t j = 0; j < ds.input_dim(); ++j)
        out << (j == 0 ? " " : ", ") << 'x' << (j + 1);
    out << "\n@outputs y\n@data\n";
    for (std::size_t r = 0; r < ds.pattern_count(); ++r) {
        for (std::size_t j = 0; j < ds.input_dim(); ++j)
            out << detail::format_double_shortest(ds.inputs(r, j)) << ',';
        out << detail::format_double_shortest(ds.targets[r]) << '\n';
    }
    if (!out)
        throw IoError("write failed for " + path.string());
}

/// Per-variable affine min-max scaling fitted on training data only.
struct Normalizer {
    std::vector<double> minimum;
    std::vector<double> maximum;

    std::size_t dim() const { return minimum.size(); }
    friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

inline Normalizer fit_normalizer(const linalg::Matrix& inputs) {
    if (inputs.rows() == 0 || inputs.cols() == 0)
        throw InvalidArgument("fit_normalizer: inputs must be nonempty");
    Normalizer nz;
    nz.minimum.assign(inputs.cols(), std::numeric_limits<double>::infinity());
    nz.maximum.assign(inputs.cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < inputs.rows(); ++r) {
        const auto row = inputs.row(r);
        for (std::size_t j = 0; j < inputs.cols(); ++j) {
            nz.minimum[j] = std::min(nz.minimum[j], row[j]);
            nz.maximum[j] = std::max(nz.maximum[j], row[j]);
        }
    }
    return nz;
}

/// Maps a value to [0,1] relative to the training range. Constant variables
/// map to 0.5; out-of-range values extrapolate without clamping.
inline double normalize_value(const Normalizer& nz, std::size_t var, double value) {
    const double range = nz.maximum[var] - nz.minimum[var];
    if (range == 0.0) return 0.5;
    return (value - nz.minimum[var]) / range;
}

inline double denormalize_value(const Normalizer& nz, std::size_t var, double scaled) {
    const double range = nz.maximum[var] - nz.minimum[var];
    if (range == 0.0) return nz.minimum[var];
    return scaled * range + nz.minimum[var];
}

inline std::vector<double> apply_normalizer(const Normalizer& nz, std::span<const double> x) {
    if (x.size() != nz.dim())
        throw DimensionMismatch("apply_normalizer: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = normalize_value(nz, j, x[j]);
    return out;
}

inline linalg::Matrix apply_normalizer(const Normalizer& nz, const linalg::Matrix& inputs) {
    if (inputs.cols() != nz.dim())
        throw DimensionMismatch("apply_normalizer: dimension mismatch");
    linalg::Matrix out(inputs.rows(), inputs.cols());
    for (std::size_t r = 0; r < inputs.rows(); ++r)
        for (std::size_t j = 0; j < inputs.cols(); ++j)
            out(r, j) = normalize_value(nz, j, inputs(r, j));
    return out;
}

/// Assignment of every pattern index to one of k folds.
struct FoldPlan {
    std::size_t fold_count = 0;
    std::vector<std::size_t> assignments; // length n_patterns, values in [0, k)
};

/// Seeded uniform shuffle followed by round-robin assignment, so fold sizes
/// differ by at most one. Deterministic per seed.
inline FoldPlan kfold_split(std::size_t n_patterns, std::size_t k, std::uint64_t seed) {
    if (k < 2)
        throw InvalidArgument("kfold_split: need at least two folds");
    if (n_patterns < k)
        throw TooFewPatterns("kfold_split: " + std::to_string(n_patterns) +
                             " patterns cannot fill " + std::to_string(k) + " folds");
    std::vector<std::size_t> order(n_patterns);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 gen(seed);
    for (std::size_t i = 0; i + 1 < n_patterns; ++i) {
        const std::size_t j = i + rng::uniform_index(gen, n_patterns - i);
        std::swap(order[i], order[j]);
    }
    FoldPlan plan;
    plan.fold_count = k;
    plan.assignments.assign(n_patterns, 0);
    for (std::size_t pos = 0; pos < n_patterns; ++pos)
        plan.assignments[order[pos]] = pos % k;
    return plan;
}

inline std::vector<std::size_t> fold_indices(const FoldPlan& plan, std::size_t fold,
                                             bool training) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < plan.assignments.size(); ++i)
        if ((plan.assignments[i] == fold) != training) out.push_back(i);
    return out;
}

inline std::vector<std::size_t> train_indices(const FoldPlan& plan, std::size_t fold) {
    return fold_indices(plan, fold, true);
}

inline std::vector<std::size_t> test_indices(const FoldPlan& plan, std::size_t fold) {
    return fold_indices(plan, fold, false);
}

/// Row subset of a dataset, in the given index order.
inline Dataset subset(const Dataset& ds, std::span<const std::size_t> rows) {
    Dataset out;
    out.name = ds.name;
    out.inputs = linalg::Matrix(rows.size(), ds.input_dim());
    out.targets.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = ds.inputs.row(rows[r]);
        std::copy(src.begin(), src.end(), out.inputs.row(r).begin());
        out.targets[r] = ds.targets[rows[r]];
    }
    return out;
}

} // namespace fuzzreg::data
