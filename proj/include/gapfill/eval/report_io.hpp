#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "gapfill/eval/sweep.hpp"
#include "gapfill/util/num.hpp"

namespace gapfill::eval {

namespace detail {

inline nlohmann::json scenario_to_json(const ScenarioScore& s) {
    nlohmann::json j;
    j["present"] = s.present;
    j["count"] = s.count;
    if (s.present) {
        j["mae"] = s.mae;
        if (s.mre_valid) j["mre"] = s.mre;
    }
    return j;
}

} // namespace detail

inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["counts"] = {{"holdout_total", r.holdout_total},
                   {"block_resident", r.block_resident},
                   {"general", r.holdout_total - r.block_resident}};
    j["overall"] = detail::scenario_to_json(r.overall);
    j["general"] = detail::scenario_to_json(r.general);
    j["per_sensor"] = nlohmann::json::array();
    for (const auto& s : r.per_sensor) {
        nlohmann::json js = detail::scenario_to_json(s.overall);
        js["sensor_id"] = s.sensor_id;
        j["per_sensor"].push_back(std::move(js));
    }
    j["trajectory"] = nlohmann::json::array();
    for (const auto& p : r.trajectory) {
        j["trajectory"].push_back({{"iteration", p.iteration},
                                   {"overall", detail::scenario_to_json(p.overall)},
                                   {"general", detail::scenario_to_json(p.general)}});
    }
    j["validation_mae"] = r.validation_mae;
    j["warnings"] = r.warnings;
    return j;
}

/// Flat rows `scenario,metric,iteration,rate,sensor,value` for external
/// plotting; pooled rows leave `sensor` empty, single runs leave `rate` empty.
inline void append_report_csv(std::string& out, const EvalReport& r, const std::string& rate) {
    auto row = [&](const std::string& scenario, const std::string& metric, const std::string& iter,
                   const std::string& sensor, double value) {
        out += scenario + "," + metric + "," + iter + "," + rate + "," + sensor + "," +
               format_g17(value) + "\n";
    };
    for (const auto& p : r.trajectory) {
        const std::string it = std::to_string(p.iteration);
        if (p.overall.present) {
            row("overall", "mae", it, "", p.overall.mae);
            if (p.overall.mre_valid) row("overall", "mre", it, "", p.overall.mre);
        }
        if (p.general.present) {
            row("general", "mae", it, "", p.general.mae);
            if (p.general.mre_valid) row("general", "mre", it, "", p.general.mre);
        }
    }
    for (std::size_t round = 0; round < r.validation_mae.size(); ++round)
        row("validation", "mae", std::to_string(round + 1), "", r.validation_mae[round]);
    const std::string final_it =
        r.trajectory.empty() ? "0" : std::to_string(r.trajectory.back().iteration);
    for (const auto& s : r.per_sensor) {
        if (!s.overall.present) continue;
        row("overall", "mae", final_it, s.sensor_id, s.overall.mae);
        if (s.overall.mre_valid) row("overall", "mre", final_it, s.sensor_id, s.overall.mre);
    }
}

inline std::string report_csv_header() { return "scenario,metric,iteration,rate,sensor,value\n"; }

inline void save_report(const EvalReport& r, const std::string& json_path,
                        const std::string& csv_path) {
    {
        std::ofstream out(json_path);
        if (!out) throw data_error("cannot write report: " + json_path);
        out << report_to_json(r).dump(2) << "\n";
    }
    {
        std::ofstream out(csv_path);
        if (!out) throw data_error("cannot write report: " + csv_path);
        std::string body = report_csv_header();
        append_report_csv(body, r, "");
        out << body;
    }
}

inline nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json jr = report_to_json(row.report);
        jr["rate"] = row.rate;
        j.push_back(std::move(jr));
    }
    return j;
}

inline void save_sweep_report(const std::vector<SweepRow>& rows, const std::string& json_path,
                              const std::string& csv_path) {
    {
        std::ofstream out(json_path);
        if (!out) throw data_error("cannot write report: " + json_path);
        out << sweep_to_json(rows).dump(2) << "\n";
    }
    {
        std::ofstream out(csv_path);
        if (!out) throw data_error("cannot write report: " + csv_path);
        std::string body = report_csv_header();
        for (const auto& row : rows) append_report_csv(body, row.report, format_g17(row.rate));
        out << body;
    }
}

} // namespace gapfill::eval
