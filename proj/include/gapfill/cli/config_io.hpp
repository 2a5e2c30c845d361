#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "gapfill/error.hpp"
#include "gapfill/imputer/config.hpp"

namespace gapfill::cli {

using imputer::Normalization;
using imputer::TrainConfig;
using imputer::TrainMode;

/// Flag-level overrides; precedence is flags > config file > defaults.
struct ConfigOverrides {
    std::optional<int> w;
    std::optional<std::size_t> hidden;
    std::optional<int> iter_num;
    std::optional<int> max_epochs;
    std::optional<int> patience;
    std::optional<std::size_t> batch_size;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> cell_kind;
    std::optional<std::string> mode;
    std::optional<std::string> initializer;
    std::optional<bool> deterministic;
    std::optional<int> threads;
};

inline TrainMode train_mode_from_name(const std::string& s) {
    if (s == "mixed") return TrainMode::Mixed;
    if (s == "separate") return TrainMode::Separate;
    throw config_error("unknown mode '" + s + "' (expected mixed or separate)");
}

inline Normalization normalization_from_name(const std::string& s) {
    if (s == "global_zscore") return Normalization::GlobalZscore;
    if (s == "per_sensor_zscore") return Normalization::PerSensorZscore;
    if (s == "none") return Normalization::None;
    throw config_error("unknown normalization '" + s + "'");
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("w", c.w);
    get("hidden", c.hidden);
    get("dropout", c.dropout);
    get("iter_num", c.iter_num);
    get("batch_size", c.batch_size);
    get("max_epochs", c.max_epochs);
    get("patience", c.patience);
    get("seed", c.seed);
    get("validation_fraction", c.validation_fraction);
    get("include_center_input", c.include_center_input);
    get("warm_start", c.warm_start);
    get("learning_rate", c.optimizer.learning_rate);
    get("beta1", c.optimizer.beta1);
    get("beta2", c.optimizer.beta2);
    get("epsilon", c.optimizer.epsilon);
    get("threads", c.threads);
    get("deterministic", c.deterministic);
    if (j.contains("cell_kind")) c.cell_kind = nn::cell_kind_from_name(j.at("cell_kind").get<std::string>());
    if (j.contains("mode")) c.mode = train_mode_from_name(j.at("mode").get<std::string>());
    if (j.contains("normalization"))
        c.normalization = normalization_from_name(j.at("normalization").get<std::string>());
    if (j.contains("initializer")) {
        const auto& ji = j.at("initializer");
        if (ji.contains("kind")) {
            auto m = init::initializer_from_name(ji.at("kind").get<std::string>());
            if (!m) throw config_error("unknown initializer '" + ji.at("kind").get<std::string>() + "'");
            c.initializer.method = *m;
        }
        if (ji.contains("width")) c.initializer.width = ji.at("width").get<std::size_t>();
        if (ji.contains("idw_power")) c.initializer.idw_power = ji.at("idw_power").get<double>();
        if (ji.contains("ses_alpha")) c.initializer.ses_alpha = ji.at("ses_alpha").get<double>();
    }
    return c;
}

inline nlohmann::json config_to_json(const TrainConfig& c) {
    nlohmann::json j;
    j["w"] = c.w;
    j["hidden"] = c.hidden;
    j["dropout"] = c.dropout;
    j["iter_num"] = c.iter_num;
    j["batch_size"] = c.batch_size;
    j["max_epochs"] = c.max_epochs;
    j["patience"] = c.patience;
    j["seed"] = c.seed;
    j["cell_kind"] = nn::cell_kind_name(c.cell_kind);
    j["mode"] = imputer::train_mode_name(c.mode);
    j["include_center_input"] = c.include_center_input;
    j["normalization"] = imputer::normalization_name(c.normalization);
    j["validation_fraction"] = c.validation_fraction;
    j["warm_start"] = c.warm_start;
    j["learning_rate"] = c.optimizer.learning_rate;
    j["beta1"] = c.optimizer.beta1;
    j["beta2"] = c.optimizer.beta2;
    j["epsilon"] = c.optimizer.epsilon;
    j["threads"] = c.threads;
    j["deterministic"] = c.deterministic;
    j["initializer"] = {{"kind", init::initializer_name(c.initializer.method)},
                        {"width", c.initializer.width},
                        {"idw_power", c.initializer.idw_power},
                        {"ses_alpha", c.initializer.ses_alpha}};
    return j;
}

/// Loads the config file (when given) and applies flag overrides on top.
inline TrainConfig resolve_config(const std::string& config_path, const ConfigOverrides& ov) {
    TrainConfig c;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw config_error("cannot open config file: " + config_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw config_error("config parse error: " + std::string(e.what()));
        }
        try {
            c = config_from_json(j);
        } catch (const nlohmann::json::exception& e) {
            throw config_error("config field error: " + std::string(e.what()));
        }
    }
    if (ov.w) c.w = *ov.w;
    if (ov.hidden) c.hidden = *ov.hidden;
    if (ov.iter_num) c.iter_num = *ov.iter_num;
    if (ov.max_epochs) c.max_epochs = *ov.max_epochs;
    if (ov.patience) c.patience = *ov.patience;
    if (ov.batch_size) c.batch_size = *ov.batch_size;
    if (ov.seed) c.seed = *ov.seed;
    if (ov.cell_kind) c.cell_kind = nn::cell_kind_from_name(*ov.cell_kind);
    if (ov.mode) c.mode = train_mode_from_name(*ov.mode);
    if (ov.initializer) {
        auto m = init::initializer_from_name(*ov.initializer);
        if (!m) throw config_error("unknown initializer '" + *ov.initializer + "'");
        c.initializer.method = *m;
    }
    if (ov.deterministic) c.deterministic = *ov.deterministic;
    if (ov.threads) c.threads = *ov.threads;
    c.validate();
    return c;
}

} // namespace gapfill::cli
