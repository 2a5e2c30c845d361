#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "gapfill/core/anchor.hpp"
#include "gapfill/core/types.hpp"
#include "gapfill/error.hpp"
#include "gapfill/util/rng.hpp"

namespace gapfill::ingest {

struct SplitSpec {
    std::set<int> test_months = {3, 6, 9, 12}; // calendar-month ordinals
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
            throw config_error("split: validation_fraction must be in (0,1)");
        for (int m : test_months)
            if (m < 1 || m > 12) throw config_error("split: test months must be within 1..12");
    }
};

struct EntryRef {
    std::uint32_t sensor = 0;
    std::uint32_t t = 0;
    bool operator<(const EntryRef& o) const {
        return sensor != o.sensor ? sensor < o.sensor : t < o.t;
    }
    bool operator==(const EntryRef& o) const { return sensor == o.sensor && t == o.t; }
};

struct SplitResult {
    core::SensorDataset train;
    core::SensorDataset test;
    std::vector<EntryRef> validation; // anchor centers inside the train part
    std::vector<std::size_t> test_timestamp_indices;
};

namespace detail {

inline core::SensorDataset subset_by_timestamps(const core::SensorDataset& ds,
                                                const std::vector<std::size_t>& keep) {
    core::SensorDataset out;
    out.variable_name = ds.variable_name;
    out.ts_kind = ds.ts_kind;
    out.sensor_ids = ds.sensor_ids;
    const std::size_t S = ds.num_sensors();
    out.values.reserve(keep.size() * S);
    out.mask.reserve(keep.size() * S);
    out.truth.resize(keep.size() * S);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const std::size_t t = keep[i];
        out.timestamps.push_back(ds.timestamps[t]);
        if (ds.has_calendar()) out.calendar.push_back(ds.calendar[t]);
        for (std::size_t s = 0; s < S; ++s) {
            const std::size_t c = ds.cell(t, s);
            out.values.push_back(ds.values[c]);
            out.mask.push_back(ds.mask[c]);
            if (ds.truth.has(c)) {
                core::TruthAudit::Scope scope; // structural copy, value not interpreted
                out.truth.set(i * S + s, ds.truth.value(c));
            }
        }
    }
    out.finalize();
    return out;
}

} // namespace detail

/// Samples floor(fraction * candidates) validation centers from Observed
/// entries whose anchors are valid, restricted to `allowed` timestamps
/// (empty = all). Deterministic given the seed.
inline std::vector<EntryRef> select_validation_centers(const core::SensorDataset& ds, int w,
                                                       double fraction, std::uint64_t seed,
                                                       const std::vector<bool>& allowed = {}) {
    std::vector<EntryRef> candidates;
    for (std::size_t s = 0; s < ds.num_sensors(); ++s) {
        for (std::size_t t = 0; t < ds.num_timestamps(); ++t) {
            if (!allowed.empty() && !allowed[t]) continue;
            if (!ds.observed(t, s)) continue;
            if (core::is_valid_anchor(core::extract_anchor(ds, s, t, w)))
                candidates.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(t)});
        }
    }
    const auto k = static_cast<std::size_t>(fraction * static_cast<double>(candidates.size()));
    Rng rng = make_rng(seed);
    auto chosen = sample_without_replacement(candidates.size(), k, rng);
    std::vector<EntryRef> out;
    out.reserve(chosen.size());
    for (std::size_t i : chosen) out.push_back(candidates[i]);
    std::sort(out.begin(), out.end());
    return out;
}

/// Month-based split when calendar metadata is present; otherwise the tail
/// |test_months|/12 fraction of timestamps forms a contiguous test segment.
inline SplitResult split(const core::SensorDataset& ds, const SplitSpec& spec, int w = 12) {
    spec.validate();
    const std::size_t T = ds.num_timestamps();
    std::vector<bool> is_test(T, false);
    if (ds.has_calendar()) {
        for (std::size_t t = 0; t < T; ++t)
            if (spec.test_months.count(ds.calendar[t].month)) is_test[t] = true;
    } else {
        const auto test_len =
            static_cast<std::size_t>(static_cast<double>(T) * static_cast<double>(spec.test_months.size()) / 12.0);
        for (std::size_t t = T - test_len; t < T; ++t) is_test[t] = true;
    }

    SplitResult r;
    std::vector<std::size_t> train_idx;
    std::vector<bool> is_train(T, false);
    for (std::size_t t = 0; t < T; ++t) {
        if (is_test[t])
            r.test_timestamp_indices.push_back(t);
        else {
            train_idx.push_back(t);
            is_train[t] = true;
        }
    }
    if (train_idx.empty()) throw config_error("split: empty training set");
    if (r.test_timestamp_indices.empty()) throw config_error("split: empty test set");

    r.train = detail::subset_by_timestamps(ds, train_idx);
    r.test = detail::subset_by_timestamps(ds, r.test_timestamp_indices);
    r.validation = select_validation_centers(ds, w, spec.validation_fraction, spec.seed, is_train);
    return r;
}

} // namespace gapfill::ingest
