#pragma once

#include <algorithm>
#include <vector>

#include "gapfill/core/types.hpp"

namespace gapfill::core {

struct Run {
    std::size_t start = 0;
    std::size_t length = 0;
};

/// Spatial blocks: timestamps at which no sensor has an observation.
/// Temporal blocks: maximal per-sensor missing runs of length >= run_threshold.
/// Holdout counts as missing for classification.
struct BlockClassification {
    std::size_t run_threshold = 11;
    std::vector<std::size_t> spatial;       // sorted timestamp indices
    std::vector<std::vector<Run>> temporal; // per sensor, sorted by start

    bool in_spatial(std::size_t t) const {
        return std::binary_search(spatial.begin(), spatial.end(), t);
    }

    bool in_temporal(std::size_t sensor, std::size_t t) const {
        const auto& runs = temporal[sensor];
        auto it = std::upper_bound(runs.begin(), runs.end(), t,
                                   [](std::size_t v, const Run& r) { return v < r.start; });
        if (it == runs.begin()) return false;
        --it;
        return t < it->start + it->length;
    }

    bool in_block(std::size_t sensor, std::size_t t) const {
        return in_spatial(t) || in_temporal(sensor, t);
    }
};

inline BlockClassification classify_blocks(const SensorDataset& ds, std::size_t run_threshold = 11) {
    if (run_threshold < 1) throw config_error("classify_blocks: run threshold must be >= 1");
    BlockClassification b;
    b.run_threshold = run_threshold;
    const std::size_t T = ds.num_timestamps(), S = ds.num_sensors();

    for (std::size_t t = 0; t < T; ++t) {
        bool any_observed = false;
        for (std::size_t s = 0; s < S; ++s) {
            if (ds.observed(t, s)) {
                any_observed = true;
                break;
            }
        }
        if (!any_observed) b.spatial.push_back(t);
    }

    b.temporal.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
        std::size_t run_start = 0, run_len = 0;
        for (std::size_t t = 0; t <= T; ++t) {
            const bool missing = t < T && !ds.observed(t, s);
            if (missing) {
                if (run_len == 0) run_start = t;
                ++run_len;
            } else if (run_len > 0) {
                if (run_len >= run_threshold) b.temporal[s].push_back({run_start, run_len});
                run_len = 0;
            }
        }
    }
    return b;
}

enum class Scenario { GeneralMissing, OverallOnly, NotMissing };

inline Scenario scenario_membership(const SensorDataset& ds, const BlockClassification& blocks,
                                    std::size_t sensor, std::size_t t) {
    if (sensor >= ds.num_sensors() || t >= ds.num_timestamps())
        throw std::out_of_range("scenario_membership: entry out of range");
    if (ds.observed(t, sensor)) return Scenario::NotMissing;
    return blocks.in_block(sensor, t) ? Scenario::OverallOnly : Scenario::GeneralMissing;
}

} // namespace gapfill::core
