#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "json.hpp"

#include "fuzzreg/model.hpp"

// Versioned JSON serialization of fitted models. The coefficient ordering is
// the canonical column layout, recorded in the document so readers can
// reject incompatible files. Save -> load -> predict is bit-identical.

namespace fuzzreg::model {

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json to_json(const Model& model) {
    nlohmann::json j;
    j["format"] = "fuzzreg-model";
    j["version"] = kModelFormatVersion;
    j["order"] = poly::order_to_int(model.order);
    j["clusters"] = model.clusters();
    j["input_dim"] = model.input_dim;
    j["fuzzifier"] = model.fuzzifier;
    j["column_layout"] = model.column_layout;
    j["prototypes"] = model.prototypes.entries(); // row-major
    j["coefficients"] = model.coefficients;
    j["normalizer"] = {{"min", model.normalizer.minimum}, {"max", model.normalizer.maximum}};
    j["min_norm_fallback"] = model.used_min_norm_fallback;
    return j;
}

inline Model model_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {
        "format",        "version",      "order",      "clusters",
        "input_dim",     "fuzzifier",    "column_layout", "prototypes",
        "coefficients",  "normalizer",   "min_norm_fallback"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.contains(key))
            throw ParseError("model document: unknown key '" + key + "'");
    }
    for (const auto& key : known)
        if (!j.contains(key))
            throw ParseError("model document: missing key '" + key + "'");
    if (j.at("format").get<std::string>() != "fuzzreg-model")
        throw ParseError("model document: unexpected format tag");
    if (j.at("version").get<int>() != kModelFormatVersion)
        throw ParseError("model document: unsupported version");

    Model model;
    model.order = poly::order_from_int(j.at("order").get<int>());
    model.input_dim = j.at("input_dim").get<std::size_t>();
    model.fuzzifier = j.at("fuzzifier").get<double>();
    model.column_layout = j.at("column_layout").get<std::string>();
    if (model.column_layout != poly::kColumnLayout)
        throw ParseError("model document: incompatible column layout '" + model.column_layout +
                         "'");

    const std::size_t clusters = j.at("clusters").get<std::size_t>();
    const auto prototypes = j.at("prototypes").get<std::vector<double>>();
    if (prototypes.size() != clusters * model.input_dim)
        throw ParseError("model document: prototype block has wrong length");
    model.prototypes = linalg::Matrix(clusters, model.input_dim);
    model.prototypes.entries() = prototypes;

    model.coefficients = j.at("coefficients").get<std::vector<double>>();
    if (model.coefficients.size() != clusters * model.terms_per_rule())
        throw ParseError("model document: coefficient vector has wrong length");

    const auto& nz = j.at("normalizer");
    model.normalizer.minimum = nz.at("min").get<std::vector<double>>();
    model.normalizer.maximum = nz.at("max").get<std::vector<double>>();
    if (model.normalizer.minimum.size() != model.input_dim ||
        model.normalizer.maximum.size() != model.input_dim)
        throw ParseError("model document: normalizer has wrong length");

    model.used_min_norm_fallback = j.at("min_norm_fallback").get<bool>();
    if (!model.prototypes.all_finite())
        throw ParseError("model document: prototypes must be finite");
    for (double a : model.coefficients)
        if (!std::isfinite(a)) throw ParseError("model document: coefficients must be finite");
    return model;
}

inline void save_model(const Model& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << to_json(model).dump(2) << '\n';
    if (!out)
        throw IoError("write failed for " + path.string());
}

inline Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("model document " + path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

} // namespace fuzzreg::model
