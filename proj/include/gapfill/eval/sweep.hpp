#pragma once

#include <algorithm>
#include <vector>

#include "gapfill/eval/score.hpp"
#include "gapfill/ingest/simulate.hpp"

namespace gapfill::eval {

inline const std::vector<double>& default_sweep_rates() {
    static const std::vector<double> rates = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    return rates;
}

struct SweepRow {
    double rate = 0.0;
    EvalReport report;
};

/// For each rate: exact-count MCAR holdout, full cascade, score. Holdout seeds
/// derive deterministically from (master seed, rate index); rows come back
/// ordered by rate ascending.
inline std::vector<SweepRow> sweep_missing_rates(const SensorDataset& ds,
                                                 std::vector<double> rates,
                                                 const imputer::TrainConfig& cfg,
                                                 std::size_t block_threshold = 11) {
    if (rates.empty()) rates = default_sweep_rates();
    std::sort(rates.begin(), rates.end());
    for (double r : rates)
        if (!(r > 0.0 && r < 1.0)) throw config_error("sweep: rates must be in (0,1)");

    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        ingest::MissingSpec mspec;
        mspec.mechanism = ingest::MissingMechanism::RandomRate;
        mspec.rate = rates[i];
        mspec.seed = derive_seed(cfg.seed, 0x5EED + i);
        const SensorDataset held = ingest::simulate_missing(ds, mspec);

        imputer::TrainConfig run_cfg = cfg;
        run_cfg.seed = derive_seed(cfg.seed, 0xA0 + i);
        const auto run = imputer::run_cascade(held, run_cfg);
        const auto blocks = core::classify_blocks(held, block_threshold);

        SweepRow row;
        row.rate = rates[i];
        row.report = score(run, held, blocks);
        rows.push_back(std::move(row));
    }
    return rows;
}

struct InitializerComparison {
    init::InitializerKind kind;
    double init_mae = 0.0;         // T_0 scored directly
    double post_cascade_mae = 0.0; // final series
    EvalReport report;
};

/// Scores each initializer before and after the cascade refines it.
inline std::vector<InitializerComparison> compare_initializers(
    const SensorDataset& ds, const std::vector<init::InitializerKind>& kinds,
    const imputer::TrainConfig& cfg, const init::SensorCoordinates& coords = {},
    std::size_t block_threshold = 11) {
    if (kinds.empty()) throw config_error("compare_initializers: need at least one kind");
    const auto blocks = core::classify_blocks(ds, block_threshold);
    std::vector<InitializerComparison> rows;
    for (const auto& kind : kinds) {
        imputer::TrainConfig run_cfg = cfg;
        run_cfg.initializer = kind;
        const auto run = imputer::run_cascade(ds, run_cfg, coords);
        InitializerComparison row;
        row.kind = kind;
        row.report = score(run, ds, blocks);
        row.init_mae = row.report.trajectory.front().overall.mae;
        row.post_cascade_mae = row.report.overall.mae;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace gapfill::eval
