// Command-line front end: synthetic data generation, experiment runs, and
// cross-dataset statistical comparison.
//
// Exit codes: 0 success, 1 any failed grid cell, 2 configuration or parse
// error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fuzzreg/dataio.hpp"
#include "fuzzreg/format.hpp"
#include "fuzzreg/harness.hpp"
#include "fuzzreg/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailedCell = 1;
constexpr int kExitConfigError = 2;

int run_synth(std::size_t count, std::uint64_t seed, const std::string& out_path) {
    const fuzzreg::data::Dataset ds = fuzzreg::data::generate_synthetic(count, seed);
    fuzzreg::data::save_synthetic_csv(ds, out_path);
    std::cout << "wrote " << ds.pattern_count() << " samples to " << out_path << "\n";
    return kExitOk;
}

void print_summary(const fuzzreg::harness::ExperimentReport& report) {
    using fuzzreg::detail::format_double_shortest;
    std::cout << "dataset: " << report.dataset_name << " (" << report.pattern_count
              << " patterns, " << report.input_dim << " inputs), metric: "
              << fuzzreg::metrics::metric_name(report.config.metric) << ", folds: "
              << report.config.folds << "\n";
    for (const auto& vr : report.variants) {
        std::cout << "  " << vr.variant.label << ": ";
        if (vr.any_failed) {
            std::size_t failed = 0;
            for (const auto& cell : vr.cells) failed += cell.failed ? 1 : 0;
            std::cout << failed << "/" << vr.cells.size() << " folds failed";
            if (vr.test_summary)
                std::cout << "; test " << format_double_shortest(vr.test_summary->mean)
                          << " on the rest";
            std::cout << "\n";
            continue;
        }
        std::cout << "train " << format_double_shortest(vr.train_summary->mean) << " +/- "
                  << format_double_shortest(vr.train_summary->std) << ", test "
                  << format_double_shortest(vr.test_summary->mean) << " +/- "
                  << format_double_shortest(vr.test_summary->std);
        if (vr.lssc_mean) std::cout << ", lssc " << format_double_shortest(*vr.lssc_mean);
        std::cout << "\n";
    }
    if (report.best_variant_index)
        std::cout << "best test mean: "
                  << report.variants[*report.best_variant_index].variant.label << "\n";
}

int run_experiment_command(const std::string& config_path, const std::string& out_dir) {
    const fuzzreg::harness::ExperimentConfig config = fuzzreg::harness::load_config(config_path);
    const fuzzreg::harness::ExperimentReport report = fuzzreg::harness::run_experiment(config);
    fuzzreg::harness::emit_report(report, out_dir);
    for (const auto& warning : report.warnings) std::cerr << "warning: " << warning << "\n";
    print_summary(report);
    if (report.any_failed) {
        for (const auto& vr : report.variants)
            for (const auto& cell : vr.cells)
                if (cell.failed)
                    std::cerr << "failed cell: variant '" << vr.variant.label << "', fold "
                              << cell.fold << ": " << cell.error << "\n";
        return kExitFailedCell;
    }
    return kExitOk;
}

int run_compare(const std::vector<std::string>& report_dirs, const std::string& control,
                double alpha, std::optional<double> critical_value,
                const std::optional<std::string>& out_dir) {
    std::vector<fuzzreg::harness::ExperimentReport> reports;
    for (const auto& dir : report_dirs) {
        std::filesystem::path path(dir);
        if (std::filesystem::is_directory(path)) path /= "report.json";
        reports.push_back(fuzzreg::harness::load_report(path));
    }
    const fuzzreg::harness::ComparisonDocument doc =
        fuzzreg::harness::compare_variants(reports, control, alpha, critical_value);

    using fuzzreg::detail::format_double_shortest;
    std::cout << "datasets: " << doc.table.datasets.size() << ", models: "
              << doc.table.models.size() << "\n";
    std::cout << "chi_squared " << format_double_shortest(doc.friedman.chi_squared)
              << ", F " << format_double_shortest(doc.friedman.f_statistic) << " (df "
              << doc.friedman.df1 << ", " << doc.friedman.df2 << ")";
    if (doc.rejects_null)
        std::cout << (*doc.rejects_null ? " > " : " <= ")
                  << format_double_shortest(*doc.critical_value)
                  << (*doc.rejects_null ? ": null hypothesis rejected" : ": not significant");
    std::cout << "\ncritical difference " << format_double_shortest(doc.critical_difference)
              << " at alpha " << format_double_shortest(doc.alpha) << ", control '"
              << doc.control << "'\n";
    for (const auto& entry : doc.entries) {
        std::cout << "  " << entry.label << ": avg rank "
                  << format_double_shortest(entry.avg_rank) << ", diff "
                  << format_double_shortest(entry.diff_vs_control)
                  << (entry.exceeds_cd ? " (> CD)" : "") << "\n";
    }
    if (out_dir) fuzzreg::harness::emit_comparison(doc, *out_dir);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fuzzreg: fuzzy rule-based polynomial regression toolkit"};
    app.set_version_flag("--version", std::string("fuzzreg ") + std::string(fuzzreg::kVersion));
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "generate the synthetic benchmark dataset as CSV");
    std::size_t synth_count = 500;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    synth->add_option("--count", synth_count, "number of samples")->required();
    synth->add_option("--seed", synth_seed, "generator seed")->required();
    synth->add_option("--out", synth_out, "output CSV path")->required();

    auto* run = app.add_subcommand("run", "execute an experiment described by a JSON config");
    std::string run_config, run_out;
    run->add_option("--config", run_config, "experiment config JSON")->required();
    run->add_option("--out", run_out, "output directory")->required();

    auto* compare = app.add_subcommand("compare", "Friedman / critical-difference comparison "
                                                  "across experiment reports");
    std::vector<std::string> compare_reports;
    std::string compare_control;
    double compare_alpha = 0.05;
    double compare_critical = 0.0;
    std::string compare_out;
    compare->add_option("--reports", compare_reports,
                        "report directories (or report.json files)")
        ->required()
        ->expected(-1);
    compare->add_option("--control", compare_control, "control variant label")->required();
    compare->add_option("--alpha", compare_alpha, "significance level");
    auto* critical_opt =
        compare->add_option("--critical-value", compare_critical,
                            "F critical value for the null-hypothesis verdict");
    compare->add_option("--out", compare_out, "directory for comparison.json/csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (synth->parsed()) return run_synth(synth_count, synth_seed, synth_out);
        if (run->parsed()) return run_experiment_command(run_config, run_out);
        if (compare->parsed()) {
            std::optional<double> critical;
            if (critical_opt->count() > 0) critical = compare_critical;
            std::optional<std::string> out;
            if (!compare_out.empty()) out = compare_out;
            return run_compare(compare_reports, compare_control, compare_alpha, critical, out);
        }
    } catch (const fuzzreg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const fuzzreg::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const fuzzreg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitConfigError;
}
