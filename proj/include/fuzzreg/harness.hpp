#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fuzzreg/dataio.hpp"
#include "fuzzreg/errors.hpp"
#include "fuzzreg/format.hpp"
#include "fuzzreg/metrics.hpp"
#include "fuzzreg/model.hpp"
#include "fuzzreg/stats.hpp"

// Experiment runner: a variant grid evaluated under k-fold cross-validation
// with one shared fold plan, per-cell failure isolation, deterministic
// seeding, and report/plot-data emission.

namespace fuzzreg::harness {

struct SyntheticSpec {
    std::size_t count = 0;
    std::uint64_t seed = 0;
};

struct DatasetSource {
    enum class Kind { keel, synthetic };
    Kind kind = Kind::synthetic;
    std::string path;       // kind == keel
    SyntheticSpec synthetic; // kind == synthetic
};

struct Variant {
    std::string label;
    poly::Order order = poly::Order::quadratic;
    std::size_t clusters = 2;
    model::PenaltySpec penalties;
};

struct ExperimentConfig {
    DatasetSource dataset;
    metrics::Metric metric = metrics::Metric::rmse;
    std::size_t folds = 5;
    std::uint64_t base_seed = 0;
    double fuzzifier = 2.0;
    std::vector<Variant> variants;
    double alpha = 0.05;
    std::optional<double> friedman_critical_value;
};

namespace detail {

using fuzzreg::detail::format_double_shortest;

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                                const std::string& context) {
    if (!j.is_object())
        throw ConfigError(context + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.contains(key))
            throw ConfigError(context + ": unknown key '" + key + "'");
    }
}

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key,
                                           const std::string& context) {
    if (!j.contains(key))
        throw ConfigError(context + ": missing required key '" + key + "'");
    return j.at(key);
}

} // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(j,
                                {"dataset", "metric", "folds", "base_seed", "fuzzifier",
                                 "variants", "alpha", "friedman_critical_value"},
                                "config");
    ExperimentConfig config;

    const auto& ds = detail::require_field(j, "dataset", "config");
    const std::string kind = detail::require_field(ds, "kind", "config.dataset").get<std::string>();
    if (kind == "keel") {
        detail::reject_unknown_keys(ds, {"kind", "path"}, "config.dataset");
        config.dataset.kind = DatasetSource::Kind::keel;
        config.dataset.path =
            detail::require_field(ds, "path", "config.dataset").get<std::string>();
    } else if (kind == "synthetic") {
        detail::reject_unknown_keys(ds, {"kind", "count", "seed"}, "config.dataset");
        config.dataset.kind = DatasetSource::Kind::synthetic;
        config.dataset.synthetic.count =
            detail::require_field(ds, "count", "config.dataset").get<std::size_t>();
        config.dataset.synthetic.seed =
            detail::require_field(ds, "seed", "config.dataset").get<std::uint64_t>();
    } else {
        throw ConfigError("config.dataset: kind must be 'keel' or 'synthetic'");
    }

    try {
        config.metric =
            metrics::metric_from_name(detail::require_field(j, "metric", "config").get<std::string>());
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config.metric: ") + e.what());
    }
    config.folds = detail::require_field(j, "folds", "config").get<std::size_t>();
    if (config.folds < 2)
        throw ConfigError("config.folds: need at least 2");
    config.base_seed = detail::require_field(j, "base_seed", "config").get<std::uint64_t>();
    if (j.contains("fuzzifier")) config.fuzzifier = j.at("fuzzifier").get<double>();
    if (!(config.fuzzifier > 1.0))
        throw ConfigError("config.fuzzifier: must be greater than 1");
    if (j.contains("alpha")) config.alpha = j.at("alpha").get<double>();
    if (!(config.alpha > 0.0 && config.alpha < 1.0))
        throw ConfigError("config.alpha: must lie strictly between 0 and 1");
    if (j.contains("friedman_critical_value"))
        config.friedman_critical_value = j.at("friedman_critical_value").get<double>();

    const auto& variants = detail::require_field(j, "variants", "config");
    if (!variants.is_array() || variants.empty())
        throw ConfigError("config.variants: need a nonempty array");
    std::set<std::string> labels;
    for (std::size_t v = 0; v < variants.size(); ++v) {
        const auto& jv = variants.at(v);
        const std::string context = "config.variants[" + std::to_string(v) + "]";
        detail::reject_unknown_keys(jv, {"label", "order", "clusters", "penalties"}, context);
        Variant variant;
        variant.label = detail::require_field(jv, "label", context).get<std::string>();
        if (variant.label.empty())
            throw ConfigError(context + ": label must be nonempty");
        if (!labels.insert(variant.label).second)
            throw ConfigError(context + ": duplicate label '" + variant.label + "'");
        try {
            variant.order = poly::order_from_int(detail::require_field(jv, "order", context).get<int>());
        } catch (const InvalidArgument& e) {
            throw ConfigError(context + ": " + e.what());
        }
        variant.clusters = detail::require_field(jv, "clusters", context).get<std::size_t>();
        if (variant.clusters < 1)
            throw ConfigError(context + ": clusters must be at least 1");
        if (jv.contains("penalties")) {
            const auto& jp = jv.at("penalties");
            detail::reject_unknown_keys(jp, {"lambda1", "lambda2", "lambda3"},
                                        context + ".penalties");
            if (jp.contains("lambda1")) variant.penalties.lambda1 = jp.at("lambda1").get<double>();
            if (jp.contains("lambda2")) variant.penalties.lambda2 = jp.at("lambda2").get<double>();
            if (jp.contains("lambda3")) variant.penalties.lambda3 = jp.at("lambda3").get<double>();
            if (variant.penalties.lambda1 < 0.0 || variant.penalties.lambda2 < 0.0 ||
                variant.penalties.lambda3 < 0.0)
                throw ConfigError(context + ".penalties: values must be nonnegative");
        }
        config.variants.push_back(std::move(variant));
    }
    return config;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

inline nlohmann::json config_to_json(const ExperimentConfig& config) {
    nlohmann::json ds;
    if (config.dataset.kind == DatasetSource::Kind::keel) {
        ds = {{"kind", "keel"}, {"path", config.dataset.path}};
    } else {
        ds = {{"kind", "synthetic"},
              {"count", config.dataset.synthetic.count},
              {"seed", config.dataset.synthetic.seed}};
    }
    nlohmann::json variants = nlohmann::json::array();
    for (const auto& v : config.variants) {
        variants.push_back({{"label", v.label},
                            {"order", poly::order_to_int(v.order)},
                            {"clusters", v.clusters},
                            {"penalties",
                             {{"lambda1", v.penalties.lambda1},
                              {"lambda2", v.penalties.lambda2},
                              {"lambda3", v.penalties.lambda3}}}});
    }
    nlohmann::json j = {{"dataset", ds},
                        {"metric", std::string(metrics::metric_name(config.metric))},
                        {"folds", config.folds},
                        {"base_seed", config.base_seed},
                        {"fuzzifier", config.fuzzifier},
                        {"alpha", config.alpha},
                        {"variants", variants}};
    if (config.friedman_critical_value)
        j["friedman_critical_value"] = *config.friedman_critical_value;
    return j;
}

struct CellResult {
    std::size_t fold = 0;
    bool failed = false;
    std::string error;
    double train_error = 0.0;
    double test_error = 0.0;
    std::optional<double> lssc; // undefined for all-zero non-constant coefficients
    bool used_min_norm_fallback = false;
};

struct VariantReport {
    Variant variant;
    std::vector<CellResult> cells; // exactly k entries
    std::optional<metrics::ErrorSummary> train_summary;
    std::optional<metrics::ErrorSummary> test_summary;
    std::optional<double> lssc_mean; // over folds where defined
    bool any_failed = false;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::string dataset_name;
    std::size_t pattern_count = 0;
    std::size_t input_dim = 0;
    std::vector<VariantReport> variants;
    std::vector<std::string> warnings;
    std::optional<std::size_t> best_variant_index; // minimal mean test error
    bool any_failed = false;
};

inline data::Dataset load_dataset(const DatasetSource& source) {
    if (source.kind == DatasetSource::Kind::keel) return data::load_keel(source.path);
    return data::generate_synthetic(source.synthetic.count, source.synthetic.seed);
}

/// Fits one grid cell: normalizer and clustering are trained on the training
/// split only. The clustering seed is derived from (base_seed, fold,
/// clusters), so variants differing only in order or penalties share the
/// identical partition per fold and their comparison is paired.
inline model::Model fit_cell(const data::Dataset& train, const Variant& variant,
                             double fuzzifier, std::uint64_t base_seed, std::size_t fold) {
    model::ModelConfig mc;
    mc.clusters = variant.clusters;
    mc.fuzzifier = fuzzifier;
    mc.order = variant.order;
    mc.penalties = variant.penalties;
    mc.seed = rng::mix_seed(base_seed, fold, variant.clusters);
    return model::fit_model(train, mc);
}

/// Runs every (variant, fold) cell on one shared fold plan. A failing cell
/// is recorded and the rest of the grid still runs; any failure marks the
/// report (callers exit nonzero on it).
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    ExperimentReport report;
    report.config = config;

    const data::Dataset dataset = load_dataset(config.dataset);
    report.dataset_name = dataset.name;
    report.pattern_count = dataset.pattern_count();
    report.input_dim = dataset.input_dim();
    if (!dataset.inputs.all_finite())
        throw InvalidArgument("dataset contains non-finite inputs");

    const data::FoldPlan plan =
        data::kfold_split(dataset.pattern_count(), config.folds, config.base_seed);

    for (const auto& variant : config.variants) {
        if (const auto warning = variant.penalties.ordering_warning())
            report.warnings.push_back("variant '" + variant.label + "': " + *warning);

        VariantReport vr;
        vr.variant = variant;
        std::vector<double> train_errors, test_errors, lssc_values;
        for (std::size_t fold = 0; fold < config.folds; ++fold) {
            CellResult cell;
            cell.fold = fold;
            try {
                const data::Dataset train =
                    data::subset(dataset, data::train_indices(plan, fold));
                const data::Dataset test = data::subset(dataset, data::test_indices(plan, fold));
                const model::Model fitted =
                    fit_cell(train, variant, config.fuzzifier, config.base_seed, fold);
                cell.train_error = metrics::evaluate(
                    config.metric, train.targets, model::predict_all(fitted, train.inputs));
                cell.test_error = metrics::evaluate(config.metric, test.targets,
                                                    model::predict_all(fitted, test.inputs));
                try {
                    cell.lssc = model::lssc(fitted);
                } catch (const DegenerateLssc&) {
                    cell.lssc = std::nullopt;
                }
                cell.used_min_norm_fallback = fitted.used_min_norm_fallback;
                train_errors.push_back(cell.train_error);
                test_errors.push_back(cell.test_error);
                if (cell.lssc) lssc_values.push_back(*cell.lssc);
            } catch (const Error& e) {
                cell.failed = true;
                cell.error = e.what();
                vr.any_failed = true;
                report.any_failed = true;
            }
            vr.cells.push_back(std::move(cell));
        }
        if (!train_errors.empty()) {
            vr.train_summary = metrics::summarize(std::move(train_errors), config.metric);
            vr.test_summary = metrics::summarize(std::move(test_errors), config.metric);
        }
        if (!lssc_values.empty()) {
            double total = 0.0;
            for (double v : lssc_values) total += v;
            vr.lssc_mean = total / static_cast<double>(lssc_values.size());
        }
        report.variants.push_back(std::move(vr));
    }

    for (std::size_t v = 0; v < report.variants.size(); ++v) {
        const auto& vr = report.variants[v];
        if (vr.any_failed || !vr.test_summary) continue;
        if (!report.best_variant_index ||
            vr.test_summary->mean <
                report.variants[*report.best_variant_index].test_summary->mean)
            report.best_variant_index = v;
    }
    return report;
}

namespace detail {

inline nlohmann::json summary_to_json(const std::optional<metrics::ErrorSummary>& summary) {
    if (!summary) return nullptr;
    return {{"mean", summary->mean},
            {"std", summary->std},
            {"std_degenerate", summary->std_degenerate},
            {"per_fold", summary->per_fold}};
}

inline std::optional<metrics::ErrorSummary> summary_from_json(const nlohmann::json& j,
                                                              metrics::Metric metric) {
    if (j.is_null()) return std::nullopt;
    metrics::ErrorSummary s;
    s.metric = metric;
    s.mean = j.at("mean").get<double>();
    s.std = j.at("std").get<double>();
    s.std_degenerate = j.at("std_degenerate").get<bool>();
    s.per_fold = j.at("per_fold").get<std::vector<double>>();
    return s;
}

} // namespace detail

inline nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json variants = nlohmann::json::array();
    for (const auto& vr : report.variants) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : vr.cells) {
            nlohmann::json jc = {{"fold", cell.fold}, {"failed", cell.failed}};
            if (cell.failed) {
                jc["error"] = cell.error;
                jc["train_error"] = nullptr;
                jc["test_error"] = nullptr;
                jc["lssc"] = nullptr;
                jc["min_norm_fallback"] = nullptr;
            } else {
                jc["error"] = nullptr;
                jc["train_error"] = cell.train_error;
                jc["test_error"] = cell.test_error;
                jc["lssc"] = cell.lssc ? nlohmann::json(*cell.lssc) : nlohmann::json(nullptr);
                jc["min_norm_fallback"] = cell.used_min_norm_fallback;
            }
            cells.push_back(std::move(jc));
        }
        variants.push_back(
            {{"label", vr.variant.label},
             {"order", poly::order_to_int(vr.variant.order)},
             {"clusters", vr.variant.clusters},
             {"penalties",
              {{"lambda1", vr.variant.penalties.lambda1},
               {"lambda2", vr.variant.penalties.lambda2},
               {"lambda3", vr.variant.penalties.lambda3}}},
             {"cells", std::move(cells)},
             {"train", detail::summary_to_json(vr.train_summary)},
             {"test", detail::summary_to_json(vr.test_summary)},
             {"lssc_mean", vr.lssc_mean ? nlohmann::json(*vr.lssc_mean) : nlohmann::json(nullptr)},
             {"any_failed", vr.any_failed}});
    }
    return {{"config", config_to_json(report.config)},
            {"dataset",
             {{"name", report.dataset_name},
              {"patterns", report.pattern_count},
              {"inputs", report.input_dim}}},
            {"variants", std::move(variants)},
            {"warnings", report.warnings},
            {"best_variant",
             report.best_variant_index
                 ? nlohmann::json(report.variants[*report.best_variant_index].variant.label)
                 : nlohmann::json(nullptr)},
            {"any_failed", report.any_failed}};
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
    ExperimentReport report;
    report.config = config_from_json(j.at("config"));
    const auto& ds = j.at("dataset");
    report.dataset_name = ds.at("name").get<std::string>();
    report.pattern_count = ds.at("patterns").get<std::size_t>();
    report.input_dim = ds.at("inputs").get<std::size_t>();
    report.warnings = j.at("warnings").get<std::vector<std::string>>();
    report.any_failed = j.at("any_failed").get<bool>();

    const auto& variants = j.at("variants");
    for (std::size_t v = 0; v < variants.size(); ++v) {
        const auto& jv = variants.at(v);
        VariantReport vr;
        vr.variant.label = jv.at("label").get<std::string>();
        vr.variant.order = poly::order_from_int(jv.at("order").get<int>());
        vr.variant.clusters = jv.at("clusters").get<std::size_t>();
        vr.variant.penalties.lambda1 = jv.at("penalties").at("lambda1").get<double>();
        vr.variant.penalties.lambda2 = jv.at("penalties").at("lambda2").get<double>();
        vr.variant.penalties.lambda3 = jv.at("penalties").at("lambda3").get<double>();
        vr.any_failed = jv.at("any_failed").get<bool>();
        vr.train_summary = detail::summary_from_json(jv.at("train"), report.config.metric);
        vr.test_summary = detail::summary_from_json(jv.at("test"), report.config.metric);
        if (!jv.at("lssc_mean").is_null()) vr.lssc_mean = jv.at("lssc_mean").get<double>();
        for (const auto& jc : jv.at("cells")) {
            CellResult cell;
            cell.fold = jc.at("fold").get<std::size_t>();
            cell.failed = jc.at("failed").get<bool>();
            if (cell.failed) {
                cell.error = jc.at("error").get<std::string>();
            } else {
                cell.train_error = jc.at("train_error").get<double>();
                cell.test_error = jc.at("test_error").get<double>();
                if (!jc.at("lssc").is_null()) cell.lssc = jc.at("lssc").get<double>();
                cell.used_min_norm_fallback = jc.at("min_norm_fallback").get<bool>();
            }
            vr.cells.push_back(std::move(cell));
        }
        report.variants.push_back(std::move(vr));
    }
    const auto& best = j.at("best_variant");
    if (!best.is_null()) {
        const std::string label = best.get<std::string>();
        for (std::size_t v = 0; v < report.variants.size(); ++v)
            if (report.variants[v].variant.label == label) report.best_variant_index = v;
    }
    return report;
}

inline ExperimentReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open report " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("report " + path.string() + ": " + e.what());
    }
    try {
        return report_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("report " + path.string() + ": " + e.what());
    }
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << contents;
    if (!out)
        throw IoError("write failed for " + path.string());
}

inline std::string summary_csv(const ExperimentReport& report) {
    std::string out = "variant,order,c,lambda1,lambda2,lambda3,"
                      "train_mean,train_std,test_mean,test_std,lssc_mean\n";
    for (const auto& vr : report.variants) {
        out += vr.variant.label + ',' + std::to_string(poly::order_to_int(vr.variant.order)) +
               ',' + std::to_string(vr.variant.clusters) + ',' +
               format_double_shortest(vr.variant.penalties.lambda1) + ',' +
               format_double_shortest(vr.variant.penalties.lambda2) + ',' +
               format_double_shortest(vr.variant.penalties.lambda3) + ',';
        out += vr.train_summary ? format_double_shortest(vr.train_summary->mean) : "";
        out += ',';
        out += vr.train_summary ? format_double_shortest(vr.train_summary->std) : "";
        out += ',';
        out += vr.test_summary ? format_double_shortest(vr.test_summary->mean) : "";
        out += ',';
        out += vr.test_summary ? format_double_shortest(vr.test_summary->std) : "";
        out += ',';
        out += vr.lssc_mean ? format_double_shortest(*vr.lssc_mean) : "";
        out += '\n';
    }
    return out;
}

/// Penalty-sweep series (test error and shrinkage diagnostic against the
/// penalty configuration): one row per (variant, statistic).
inline std::string lambda_sweep_csv(const ExperimentReport& report) {
    std::string out = "variant,lambda1,lambda2,lambda3,statistic,value\n";
    for (const auto& vr : report.variants) {
        const std::string prefix = vr.variant.label + ',' +
                                   format_double_shortest(vr.variant.penalties.lambda1) + ',' +
                                   format_double_shortest(vr.variant.penalties.lambda2) + ',' +
                                   format_double_shortest(vr.variant.penalties.lambda3) + ',';
        if (vr.train_summary)
            out += prefix + "train_mean," + format_double_shortest(vr.train_summary->mean) + '\n';
        if (vr.test_summary)
            out += prefix + "test_mean," + format_double_shortest(vr.test_summary->mean) + '\n';
        if (vr.lssc_mean)
            out += prefix + "lssc_mean," + format_double_shortest(*vr.lssc_mean) + '\n';
    }
    return out;
}

/// Complexity-sweep series (error against the rule count): one row per
/// (variant, statistic).
inline std::string complexity_sweep_csv(const ExperimentReport& report) {
    std::string out = "variant,c,statistic,value\n";
    for (const auto& vr : report.variants) {
        const std::string prefix =
            vr.variant.label + ',' + std::to_string(vr.variant.clusters) + ',';
        if (vr.train_summary)
            out += prefix + "train_mean," + format_double_shortest(vr.train_summary->mean) + '\n';
        if (vr.test_summary)
            out += prefix + "test_mean," + format_double_shortest(vr.test_summary->mean) + '\n';
    }
    return out;
}

} // namespace detail

/// Writes report.json plus the summary and plot-data CSV files into out_dir.
inline void emit_report(const ExperimentReport& report, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    detail::write_file(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
    detail::write_file(out_dir / "summary.csv", detail::summary_csv(report));
    detail::write_file(out_dir / "lambda_sweep.csv", detail::lambda_sweep_csv(report));
    detail::write_file(out_dir / "complexity_sweep.csv", detail::complexity_sweep_csv(report));
}

struct ComparisonEntry {
    std::string label;
    double avg_rank = 0.0;
    double diff_vs_control = 0.0;
    bool exceeds_cd = false;
};

struct ComparisonDocument {
    stats::RankTable table;
    stats::FriedmanResult friedman;
    bool f_degenerate = false; // chi-squared at its maximum; F undefined
    double critical_difference = 0.0;
    double alpha = 0.05;
    std::string control;
    std::size_t control_index = 0;
    std::optional<double> critical_value;
    std::optional<bool> rejects_null;
    std::vector<ComparisonEntry> entries;
};

/// Cross-dataset comparison of the same variant grid: builds the dataset x
/// model test-error matrix, ranks it, and runs the Friedman and
/// Bonferroni-Dunn machinery against the chosen control.
inline ComparisonDocument compare_variants(std::span<const ExperimentReport> reports,
                                           const std::string& control, double alpha,
                                           std::optional<double> critical_value) {
    if (reports.size() < 2)
        throw InvalidArgument("compare_variants: need at least two dataset reports");
    std::vector<std::string> labels;
    for (const auto& vr : reports.front().variants) labels.push_back(vr.variant.label);
    for (const auto& report : reports) {
        if (report.variants.size() != labels.size())
            throw LabelMismatch("compare_variants: reports disagree on the variant grid");
        for (std::size_t m = 0; m < labels.size(); ++m)
            if (report.variants[m].variant.label != labels[m])
                throw LabelMismatch("compare_variants: variant label mismatch ('" +
                                    report.variants[m].variant.label + "' vs '" + labels[m] +
                                    "')");
    }
    const auto control_it = std::find(labels.begin(), labels.end(), control);
    if (control_it == labels.end())
        throw LabelMismatch("compare_variants: control label '" + control + "' not found");
    const std::size_t control_index = static_cast<std::size_t>(control_it - labels.begin());

    linalg::Matrix errors(reports.size(), labels.size());
    std::vector<std::string> dataset_names;
    for (std::size_t d = 0; d < reports.size(); ++d) {
        dataset_names.push_back(reports[d].dataset_name);
        for (std::size_t m = 0; m < labels.size(); ++m) {
            const auto& summary = reports[d].variants[m].test_summary;
            if (!summary)
                throw InvalidArgument("compare_variants: variant '" + labels[m] +
                                      "' has no test summary for dataset '" +
                                      reports[d].dataset_name + "'");
            errors(d, m) = summary->mean;
        }
    }

    ComparisonDocument doc;
    doc.table = stats::make_rank_table(labels, std::move(dataset_names), errors);
    try {
        doc.friedman = stats::friedman(doc.table.avg_ranks, reports.size());
    } catch (const DegenerateStatistic&) {
        // Chi-squared at its maximum: the ranks agree perfectly across
        // datasets, the F statistic diverges, and any threshold is exceeded.
        doc.f_degenerate = true;
        doc.friedman.chi_squared =
            stats::friedman_chi_squared(doc.table.avg_ranks, reports.size());
        doc.friedman.f_statistic = std::numeric_limits<double>::infinity();
        doc.friedman.df1 = labels.size() - 1;
        doc.friedman.df2 = (labels.size() - 1) * (reports.size() - 1);
    }
    doc.critical_difference = stats::bonferroni_dunn_cd(labels.size(), reports.size(), alpha);
    doc.alpha = alpha;
    doc.control = control;
    doc.control_index = control_index;
    doc.critical_value = critical_value;
    if (critical_value)
        doc.rejects_null = doc.f_degenerate || doc.friedman.f_statistic > *critical_value;
    for (std::size_t m = 0; m < labels.size(); ++m) {
        ComparisonEntry entry;
        entry.label = labels[m];
        entry.avg_rank = doc.table.avg_ranks[m];
        entry.diff_vs_control = doc.table.avg_ranks[m] - doc.table.avg_ranks[control_index];
        entry.exceeds_cd = m != control_index && entry.diff_vs_control >= doc.critical_difference;
        doc.entries.push_back(std::move(entry));
    }
    return doc;
}

inline nlohmann::json comparison_to_json(const ComparisonDocument& doc) {
    nlohmann::json ranks = nlohmann::json::array();
    for (std::size_t d = 0; d < doc.table.ranks.rows(); ++d) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t m = 0; m < doc.table.ranks.cols(); ++m) row.push_back(doc.table.ranks(d, m));
        ranks.push_back(std::move(row));
    }
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : doc.entries)
        entries.push_back({{"model", e.label},
                           {"avg_rank", e.avg_rank},
                           {"diff_vs_control", e.diff_vs_control},
                           {"exceeds_cd", e.exceeds_cd}});
    nlohmann::json j = {{"models", doc.table.models},
                        {"datasets", doc.table.datasets},
                        {"ranks", std::move(ranks)},
                        {"avg_ranks", doc.table.avg_ranks},
                        {"chi_squared", doc.friedman.chi_squared},
                        {"f_statistic", doc.f_degenerate ? nlohmann::json(nullptr)
                                                         : nlohmann::json(doc.friedman.f_statistic)},
                        {"f_degenerate", doc.f_degenerate},
                        {"df1", doc.friedman.df1},
                        {"df2", doc.friedman.df2},
                        {"critical_difference", doc.critical_difference},
                        {"alpha", doc.alpha},
                        {"control", doc.control},
                        {"entries", std::move(entries)}};
    if (doc.critical_value) {
        j["critical_value"] = *doc.critical_value;
        j["rejects_null"] = *doc.rejects_null;
    }
    return j;
}

inline void emit_comparison(const ComparisonDocument& doc, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    detail::write_file(out_dir / "comparison.json", comparison_to_json(doc).dump(2) + "\n");
    std::ofstream csv(out_dir / "comparison.csv");
    if (!csv)
        throw IoError("cannot open comparison.csv for writing");
    stats::write_comparison_csv(csv, doc.table.models, doc.table.avg_ranks, doc.control_index,
                                doc.critical_difference);
}

} // namespace fuzzreg::harness
