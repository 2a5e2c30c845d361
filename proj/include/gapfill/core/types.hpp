#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gapfill/error.hpp"

namespace gapfill::core {

enum class MaskState : std::uint8_t {
    Observed, // trusted reading
    Missing,  // no value available
    Holdout   // deliberately masked; true value kept aside as ground truth
};

enum class TimestampKind : std::uint8_t { EpochHours, Iso8601 };

struct CivilDate {
    int year = 0;
    int month = 0; // 1..12
};

/// Audit hook for ground-truth reads. Scoring code opens a Scope; while the
/// audit is armed, any truth read outside a Scope counts as a violation.
class TruthAudit {
public:
    static void arm() { armed_flag() = true; }
    static void disarm() { armed_flag() = false; }
    static bool armed() { return armed_flag(); }
    static void reset() { violation_count() = 0; }
    static std::uint64_t violations() { return violation_count(); }

    struct Scope {
        bool prev;
        Scope() : prev(scope_flag()) { scope_flag() = true; }
        ~Scope() { scope_flag() = prev; }
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;
    };

    static void record_read() {
        if (armed_flag() && !scope_flag()) ++violation_count();
    }

private:
    static bool& armed_flag() {
        static bool a = false;
        return a;
    }
    static std::uint64_t& violation_count() {
        static std::uint64_t v = 0;
        return v;
    }
    static bool& scope_flag() {
        static thread_local bool s = false;
        return s;
    }
};

/// True values of Holdout entries, kept apart from the working matrix so that
/// imputation code cannot touch them. Reads are audited via TruthAudit.
class GroundTruth {
public:
    void resize(std::size_t cells) { truth_.assign(cells, nan()); }

    bool has(std::size_t cell) const { return cell < truth_.size() && !std::isnan(truth_[cell]); }

    double value(std::size_t cell) const {
        TruthAudit::record_read();
        return truth_[cell];
    }

    void set(std::size_t cell, double v) { truth_[cell] = v; }
    void erase(std::size_t cell) { truth_[cell] = nan(); }

    std::size_t count() const {
        std::size_t n = 0;
        for (double v : truth_)
            if (!std::isnan(v)) ++n;
        return n;
    }

    std::size_t size() const { return truth_.size(); }

    bool operator==(const GroundTruth& o) const {
        if (truth_.size() != o.truth_.size()) return false;
        for (std::size_t i = 0; i < truth_.size(); ++i) {
            bool a = std::isnan(truth_[i]), b = std::isnan(o.truth_[i]);
            if (a != b) return false;
            if (!a && truth_[i] != o.truth_[i]) return false;
        }
        return true;
    }

private:
    static double nan() { return std::numeric_limits<double>::quiet_NaN(); }
    std::vector<double> truth_;
};

/// Multi-sensor aligned time series. values/mask are row-major [time x sensor];
/// cells that are not Observed hold NaN in `values` (Holdout truth lives in `truth`).
struct SensorDataset {
    std::string variable_name;
    TimestampKind ts_kind = TimestampKind::EpochHours;
    std::vector<std::string> sensor_ids;
    std::vector<double> timestamps;  // hours, strictly increasing
    std::vector<CivilDate> calendar; // per timestamp; filled for ISO input
    std::vector<double> values;
    std::vector<MaskState> mask;
    GroundTruth truth;
    double median_step = 1.0; // typical timestamp spacing, for boundary extrapolation

    std::size_t num_timestamps() const { return timestamps.size(); }
    std::size_t num_sensors() const { return sensor_ids.size(); }
    std::size_t num_cells() const { return values.size(); }
    bool has_calendar() const { return !calendar.empty(); }

    std::size_t cell(std::size_t t, std::size_t s) const { return t * num_sensors() + s; }
    double value(std::size_t t, std::size_t s) const { return values[cell(t, s)]; }
    MaskState state(std::size_t t, std::size_t s) const { return mask[cell(t, s)]; }
    bool observed(std::size_t t, std::size_t s) const { return state(t, s) == MaskState::Observed; }

    void set_observed(std::size_t t, std::size_t s, double v) {
        values[cell(t, s)] = v;
        mask[cell(t, s)] = MaskState::Observed;
    }

    std::size_t count_state(MaskState st) const {
        std::size_t n = 0;
        for (MaskState m : mask)
            if (m == st) ++n;
        return n;
    }

    /// Validates invariants and computes the median step. Call after construction.
    void finalize() {
        const std::size_t T = num_timestamps(), S = num_sensors();
        if (values.size() != T * S || mask.size() != T * S)
            throw data_error("dataset: values/mask dimensions do not match timestamps x sensors");
        if (!calendar.empty() && calendar.size() != T)
            throw data_error("dataset: calendar metadata length mismatch");
        for (std::size_t t = 1; t < T; ++t)
            if (!(timestamps[t] > timestamps[t - 1]))
                throw data_error("dataset: timestamps must be strictly increasing");
        for (std::size_t c = 0; c < T * S; ++c) {
            if (mask[c] == MaskState::Observed && !std::isfinite(values[c]))
                throw data_error("dataset: observed entry has non-finite value");
        }
        if (truth.size() != T * S) truth.resize(T * S);
        median_step = compute_median_step();
    }

    double compute_median_step() const {
        if (timestamps.size() < 2) return 1.0;
        std::vector<double> d(timestamps.size() - 1);
        for (std::size_t t = 1; t < timestamps.size(); ++t) d[t - 1] = timestamps[t] - timestamps[t - 1];
        std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
        return d[d.size() / 2];
    }
};

/// Builds a dataset from per-sensor rows; NaN cells become Missing. Test/ingest helper.
inline SensorDataset make_dataset(std::vector<std::string> ids, std::vector<double> timestamps,
                                  const std::vector<std::vector<double>>& rows_by_time) {
    SensorDataset ds;
    ds.sensor_ids = std::move(ids);
    ds.timestamps = std::move(timestamps);
    const std::size_t S = ds.sensor_ids.size(), T = ds.timestamps.size();
    ds.values.assign(T * S, std::numeric_limits<double>::quiet_NaN());
    ds.mask.assign(T * S, MaskState::Missing);
    for (std::size_t t = 0; t < T; ++t) {
        if (rows_by_time[t].size() != S) throw data_error("make_dataset: ragged row");
        for (std::size_t s = 0; s < S; ++s) {
            if (!std::isnan(rows_by_time[t][s])) ds.set_observed(t, s, rows_by_time[t][s]);
        }
    }
    ds.truth.resize(T * S);
    ds.finalize();
    return ds;
}

} // namespace gapfill::core
