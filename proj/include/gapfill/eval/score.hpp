#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gapfill/core/blocks.hpp"
#include "gapfill/core/types.hpp"
#include "gapfill/error.hpp"
#include "gapfill/eval/metrics.hpp"
#include "gapfill/imputer/cascade.hpp"

namespace gapfill::eval {

using core::BlockClassification;
using core::MaskState;
using core::SensorDataset;

struct ScenarioScore {
    bool present = false; // false when the scenario scored zero entries
    std::size_t count = 0;
    double mae = std::numeric_limits<double>::quiet_NaN();
    double mre = std::numeric_limits<double>::quiet_NaN();
    bool mre_valid = false;
};

struct SensorScore {
    std::string sensor_id;
    ScenarioScore overall;
};

struct TrajectoryPoint {
    std::size_t iteration = 0;
    ScenarioScore overall, general;
};

struct EvalReport {
    ScenarioScore overall, general;          // final series
    std::vector<SensorScore> per_sensor;     // final series, overall scenario
    std::vector<TrajectoryPoint> trajectory; // every T_i including T_0
    std::vector<double> validation_mae;      // per cascade round
    std::size_t holdout_total = 0;
    std::size_t block_resident = 0; // holdout entries inside spatial/temporal blocks
    std::vector<std::string> warnings;
};

namespace detail {

inline ScenarioScore score_entries(const std::vector<double>& truth, const std::vector<double>& est,
                                   std::vector<std::string>* warnings, const char* tag) {
    ScenarioScore s;
    s.count = truth.size();
    if (truth.empty()) return s;
    s.present = true;
    s.mae = mae(truth, est);
    double denom = 0.0;
    for (double v : truth) denom += v;
    if (denom > 0.0) {
        s.mre = mre(truth, est);
        s.mre_valid = true;
    } else if (warnings) {
        warnings->push_back(std::string(tag) + ": truth sum is not positive, MRE omitted");
    }
    return s;
}

} // namespace detail

/// Scores a dense-series trajectory against the Holdout ground truth, in the
/// overall scenario (all holdout entries) and the general scenario (holdout
/// entries outside spatial/temporal blocks). The only sanctioned reader of
/// ground-truth values.
inline EvalReport score(const std::vector<std::vector<double>>& trajectory, const SensorDataset& ds,
                        const BlockClassification& blocks,
                        const std::vector<double>& validation_mae = {}) {
    if (trajectory.empty()) throw config_error("score: empty trajectory");
    for (const auto& series : trajectory)
        if (series.size() != ds.num_cells()) throw config_error("score: series size mismatch");

    struct Entry {
        std::size_t sensor, t, cell;
        bool in_block;
        double truth;
    };
    std::vector<Entry> entries;
    {
        core::TruthAudit::Scope scope;
        for (std::size_t s = 0; s < ds.num_sensors(); ++s) {
            for (std::size_t t = 0; t < ds.num_timestamps(); ++t) {
                const std::size_t c = ds.cell(t, s);
                if (ds.mask[c] == MaskState::Holdout) {
                    if (!ds.truth.has(c)) throw data_error("score: holdout entry without ground truth");
                    entries.push_back({s, t, c, blocks.in_block(s, t), ds.truth.value(c)});
                }
            }
        }
    }
    if (entries.empty()) throw data_error("score: no holdout entries to score");

    EvalReport r;
    r.validation_mae = validation_mae;
    r.holdout_total = entries.size();
    for (const auto& e : entries)
        if (e.in_block) ++r.block_resident;

    auto score_series = [&](const std::vector<double>& series, TrajectoryPoint& p) {
        std::vector<double> truth_all, est_all, truth_gen, est_gen;
        truth_all.reserve(entries.size());
        est_all.reserve(entries.size());
        for (const auto& e : entries) {
            truth_all.push_back(e.truth);
            est_all.push_back(series[e.cell]);
            if (!e.in_block) {
                truth_gen.push_back(e.truth);
                est_gen.push_back(series[e.cell]);
            }
        }
        p.overall = detail::score_entries(truth_all, est_all, &r.warnings, "overall");
        p.general = detail::score_entries(truth_gen, est_gen, nullptr, "general");
    };

    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        TrajectoryPoint p;
        p.iteration = i;
        score_series(trajectory[i], p);
        r.trajectory.push_back(p);
    }
    r.overall = r.trajectory.back().overall;
    r.general = r.trajectory.back().general;

    const auto& final_series = trajectory.back();
    for (std::size_t s = 0; s < ds.num_sensors(); ++s) {
        std::vector<double> truth_s, est_s;
        for (const auto& e : entries) {
            if (e.sensor == s) {
                truth_s.push_back(e.truth);
                est_s.push_back(final_series[e.cell]);
            }
        }
        SensorScore sc;
        sc.sensor_id = ds.sensor_ids[s];
        sc.overall = detail::score_entries(truth_s, est_s, nullptr, "sensor");
        r.per_sensor.push_back(std::move(sc));
    }
    return r;
}

inline EvalReport score(const imputer::ImputationRun& run, const SensorDataset& ds,
                        const BlockClassification& blocks) {
    return score(run.series, ds, blocks, run.validation_mae);
}

} // namespace gapfill::eval
