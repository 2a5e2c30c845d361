#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "gapfill/core/types.hpp"
#include "gapfill/error.hpp"
#include "gapfill/util/num.hpp"
#include "gapfill/util/time.hpp"

namespace gapfill::ingest {

using core::CivilDate;
using core::MaskState;
using core::SensorDataset;
using core::TimestampKind;

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

struct RawRow {
    std::string sensor;
    double hours;       // timestamp in hours
    CivilDate date;     // valid for ISO files
    double value;       // NaN when NA
    bool is_na;
};

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t line_no, const std::string& why) {
    throw data_error(path + ":" + std::to_string(line_no) + ": " + why);
}

} // namespace detail

/// CSV contract: optional `# key=value` comment lines, then header
/// `sensor_id,timestamp,value`. Timestamps are ISO-8601 or integer epoch-hours,
/// uniform within a file. Value is a decimal literal or the token `NA`.
/// Sensors keep first-appearance order; timelines are union-aligned, with
/// absent cells Missing.
inline SensorDataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open dataset file: " + path);

    SensorDataset ds;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    bool kind_known = false;

    std::vector<detail::RawRow> rows;
    std::map<double, CivilDate> time_points; // hours -> calendar (calendar unused for epoch files)
    std::vector<std::string> sensor_order;
    std::unordered_map<std::string, std::size_t> sensor_index;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                while (!key.empty() && key.front() == ' ') key.erase(key.begin());
                while (!key.empty() && key.back() == ' ') key.pop_back();
                if (key == "variable") {
                    std::string val = line.substr(eq + 1);
                    if (!val.empty() && val.back() == '\r') val.pop_back();
                    ds.variable_name = val;
                }
            }
            continue;
        }
        auto fields = detail::split_csv_line(line);
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "sensor_id" || fields[1] != "timestamp" ||
                fields[2] != "value")
                detail::parse_fail(path, line_no, "expected header sensor_id,timestamp,value");
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) detail::parse_fail(path, line_no, "expected 3 fields");

        detail::RawRow row;
        row.sensor = fields[0];
        if (row.sensor.empty()) detail::parse_fail(path, line_no, "empty sensor_id");

        const std::string& ts = fields[1];
        auto as_int = parse_int(ts);
        if (!kind_known) {
            ds.ts_kind = as_int ? TimestampKind::EpochHours : TimestampKind::Iso8601;
            kind_known = true;
        }
        if (ds.ts_kind == TimestampKind::EpochHours) {
            if (!as_int) detail::parse_fail(path, line_no, "expected integer epoch-hour timestamp");
            row.hours = static_cast<double>(*as_int);
        } else {
            auto civil = parse_iso8601(ts);
            if (!civil) detail::parse_fail(path, line_no, "malformed ISO-8601 timestamp");
            row.hours = static_cast<double>(epoch_seconds(*civil)) / 3600.0;
            row.date = {civil->year, civil->month};
        }

        const std::string& val = fields[2];
        if (val == "NA") {
            row.is_na = true;
            row.value = std::numeric_limits<double>::quiet_NaN();
        } else {
            auto v = parse_double(val);
            if (!v) detail::parse_fail(path, line_no, "malformed value '" + val + "'");
            row.is_na = false;
            row.value = *v;
        }

        if (sensor_index.find(row.sensor) == sensor_index.end()) {
            sensor_index[row.sensor] = sensor_order.size();
            sensor_order.push_back(row.sensor);
        }
        time_points.emplace(row.hours, row.date);
        rows.push_back(std::move(row));
    }
    if (!header_seen) throw data_error(path + ": empty file (missing header)");
    if (rows.empty()) throw data_error(path + ": no data rows");

    ds.sensor_ids = sensor_order;
    ds.timestamps.reserve(time_points.size());
    std::unordered_map<double, std::size_t> time_index;
    for (const auto& [h, date] : time_points) {
        time_index[h] = ds.timestamps.size();
        ds.timestamps.push_back(h);
        if (ds.ts_kind == TimestampKind::Iso8601) ds.calendar.push_back(date);
    }

    const std::size_t T = ds.timestamps.size(), S = ds.sensor_ids.size();
    ds.values.assign(T * S, std::numeric_limits<double>::quiet_NaN());
    ds.mask.assign(T * S, MaskState::Missing);
    std::vector<bool> seen(T * S, false);

    for (const auto& row : rows) {
        const std::size_t s = sensor_index[row.sensor];
        const std::size_t t = time_index[row.hours];
        const std::size_t c = ds.cell(t, s);
        if (seen[c])
            throw data_error(path + ": duplicate cell for sensor '" + row.sensor + "' at timestamp index " +
                             std::to_string(t));
        seen[c] = true;
        if (!row.is_na) ds.set_observed(t, s, row.value);
    }

    ds.truth.resize(T * S);
    ds.finalize();
    return ds;
}

inline std::string format_timestamp(const SensorDataset& ds, std::size_t t) {
    if (ds.ts_kind == TimestampKind::EpochHours) {
        return format_g17(ds.timestamps[t]);
    }
    const auto secs = static_cast<std::int64_t>(std::llround(ds.timestamps[t] * 3600.0));
    return format_iso8601(civil_from_epoch_seconds(secs));
}

/// Writes one row per (sensor, timestamp), sensor-major; non-observed cells as NA.
inline void save_csv(const SensorDataset& ds, const std::string& path,
                     const std::string& comment = std::string()) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write dataset file: " + path);
    if (!comment.empty()) out << "# " << comment << "\n";
    if (!ds.variable_name.empty()) out << "# variable=" << ds.variable_name << "\n";
    out << "sensor_id,timestamp,value\n";
    for (std::size_t s = 0; s < ds.num_sensors(); ++s) {
        for (std::size_t t = 0; t < ds.num_timestamps(); ++t) {
            out << ds.sensor_ids[s] << ',' << format_timestamp(ds, t) << ',';
            if (ds.observed(t, s))
                out << format_g17(ds.value(t, s));
            else
                out << "NA";
            out << '\n';
        }
    }
    if (!out) throw data_error("write failed: " + path);
}

/// Writes a fully dense series (every cell filled) in the dataset's CSV schema.
inline void save_dense_csv(const SensorDataset& ds, const std::vector<double>& dense,
                           const std::string& path) {
    if (dense.size() != ds.num_cells()) throw data_error("save_dense_csv: size mismatch");
    std::ofstream out(path);
    if (!out) throw data_error("cannot write dense series file: " + path);
    if (!ds.variable_name.empty()) out << "# variable=" << ds.variable_name << "\n";
    out << "sensor_id,timestamp,value\n";
    for (std::size_t s = 0; s < ds.num_sensors(); ++s)
        for (std::size_t t = 0; t < ds.num_timestamps(); ++t)
            out << ds.sensor_ids[s] << ',' << format_timestamp(ds, t) << ','
                << format_g17(dense[ds.cell(t, s)]) << '\n';
    if (!out) throw data_error("write failed: " + path);
}

/// Ground-truth sidecar: `sensor_id,timestamp,true_value`, one row per Holdout entry.
inline void save_truth(const SensorDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write ground-truth file: " + path);
    out << "sensor_id,timestamp,true_value\n";
    core::TruthAudit::Scope scope; // serialization boundary, not an imputation path
    for (std::size_t s = 0; s < ds.num_sensors(); ++s) {
        for (std::size_t t = 0; t < ds.num_timestamps(); ++t) {
            const std::size_t c = ds.cell(t, s);
            if (ds.mask[c] == MaskState::Holdout) {
                out << ds.sensor_ids[s] << ',' << format_timestamp(ds, t) << ','
                    << format_g17(ds.truth.value(c)) << '\n';
            }
        }
    }
    if (!out) throw data_error("write failed: " + path);
}

/// Loads a ground-truth sidecar into the dataset: listed cells must not be
/// Observed; they become Holdout with their true value stored aside.
inline void load_truth(SensorDataset& ds, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open ground-truth file: " + path);

    std::unordered_map<std::string, std::size_t> sensor_index;
    for (std::size_t s = 0; s < ds.num_sensors(); ++s) sensor_index[ds.sensor_ids[s]] = s;
    std::unordered_map<std::string, std::size_t> time_index;
    for (std::size_t t = 0; t < ds.num_timestamps(); ++t) time_index[format_timestamp(ds, t)] = t;

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = detail::split_csv_line(line);
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "sensor_id" || fields[1] != "timestamp" ||
                fields[2] != "true_value")
                detail::parse_fail(path, line_no, "expected header sensor_id,timestamp,true_value");
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) detail::parse_fail(path, line_no, "expected 3 fields");
        auto si = sensor_index.find(fields[0]);
        if (si == sensor_index.end()) detail::parse_fail(path, line_no, "unknown sensor '" + fields[0] + "'");
        auto ti = time_index.find(fields[1]);
        if (ti == time_index.end()) detail::parse_fail(path, line_no, "timestamp not present in dataset");
        auto v = parse_double(fields[2]);
        if (!v) detail::parse_fail(path, line_no, "malformed true_value");
        const std::size_t c = ds.cell(ti->second, si->second);
        if (ds.mask[c] == MaskState::Observed)
            detail::parse_fail(path, line_no, "ground truth listed for an observed cell");
        ds.mask[c] = MaskState::Holdout;
        ds.truth.set(c, *v);
    }
    if (!header_seen) throw data_error(path + ": empty file (missing header)");
}

/// Optional sensor-coordinates sidecar: `sensor_id,x,y` in abstract planar units.
inline std::unordered_map<std::string, std::pair<double, double>> load_coordinates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open coordinates file: " + path);
    std::unordered_map<std::string, std::pair<double, double>> coords;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = detail::split_csv_line(line);
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "sensor_id" || fields[1] != "x" || fields[2] != "y")
                detail::parse_fail(path, line_no, "expected header sensor_id,x,y");
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) detail::parse_fail(path, line_no, "expected 3 fields");
        auto x = parse_double(fields[1]), y = parse_double(fields[2]);
        if (!x || !y) detail::parse_fail(path, line_no, "malformed coordinate");
        if (!coords.emplace(fields[0], std::make_pair(*x, *y)).second)
            detail::parse_fail(path, line_no, "duplicate sensor '" + fields[0] + "'");
    }
    return coords;
}

} // namespace gapfill::ingest
