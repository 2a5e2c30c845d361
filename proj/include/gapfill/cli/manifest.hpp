#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gapfill/error.hpp"
#include "gapfill/util/sha256.hpp"
#include "gapfill/util/time.hpp"

namespace gapfill::cli {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch());
    return format_iso8601(civil_from_epoch_seconds(secs.count()));
}

/// Everything needed to reproduce a run: resolved config, input digests, seed,
/// tool version, wall-clock bounds, and the artifact paths. Written even when
/// a run fails (with the error category filled in).
struct RunManifest {
    std::string command;
    std::string status = "ok";
    std::string error_category; // config | data | numeric | internal
    std::string error_message;
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::pair<std::string, std::string>> inputs; // (path, sha256)
    std::uint64_t seed = 0;
    std::string started, finished;
    std::vector<std::string> outputs;
    std::vector<double> validation_mae;     // per cascade round (run command)
    std::vector<std::string> checkpoints;   // per-round checkpoint paths

    void add_input(const std::string& path) { inputs.emplace_back(path, sha256_file(path)); }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["tool"] = "gapfill";
        j["version"] = kToolVersion;
        j["command"] = command;
        j["status"] = status;
        if (!error_category.empty()) j["error_category"] = error_category;
        if (!error_message.empty()) j["error_message"] = error_message;
        j["config"] = config;
        j["seed"] = seed;
        j["inputs"] = nlohmann::json::array();
        for (const auto& [path, digest] : inputs)
            j["inputs"].push_back({{"path", path}, {"sha256", digest}});
        j["started"] = started;
        j["finished"] = finished;
        j["outputs"] = outputs;
        if (!validation_mae.empty()) j["validation_mae"] = validation_mae;
        if (!checkpoints.empty()) j["checkpoints"] = checkpoints;
        return j;
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw data_error("cannot write manifest: " + path);
        out << to_json().dump(2) << "\n";
    }
};

} // namespace gapfill::cli
