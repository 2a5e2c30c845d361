#pragma once

#include <atomic>
#include <optional>
#include <thread>
#include <vector>

#include "gapfill/imputer/train.hpp"
#include "gapfill/ingest/split.hpp"

namespace gapfill::imputer {

/// Output of one cascade run: the dense series trajectory T_0..T_n, the
/// per-round best validation MAE, per-round checkpoints, and the fixed index
/// of missing/holdout positions being refined.
struct ImputationRun {
    std::vector<std::vector<double>> series; // iter_num + 1 dense matrices
    std::vector<double> validation_mae;      // per round
    std::vector<nn::ModelParams> checkpoints; // per round (separate mode: last sensor's)
    std::vector<EntryRef> missing_index;
    std::vector<EntryRef> validation_centers;
};

inline std::vector<EntryRef> build_missing_index(const SensorDataset& ds) {
    std::vector<EntryRef> idx;
    for (std::size_t s = 0; s < ds.num_sensors(); ++s)
        for (std::size_t t = 0; t < ds.num_timestamps(); ++t)
            if (!ds.observed(t, s))
                idx.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(t)});
    return idx;
}

/// Synchronous refinement: every indexed position gets a fresh estimate
/// computed from T_i (eval mode, de-normalized), then all updates are applied
/// at once. Observed entries are never touched.
inline std::vector<double> predict_missing(const nn::ModelParams& model, const SensorDataset& ds,
                                           const std::vector<double>& current,
                                           const std::vector<EntryRef>& missing_index,
                                           const Normalizer& norm, const TrainConfig& cfg) {
    std::vector<double> estimates(missing_index.size(), 0.0);
    const int threads = cfg.effective_threads();

    auto work = [&](std::size_t lo, std::size_t hi, nn::Workspace& ws) {
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& e = missing_index[i];
            const auto sample = make_context(ds, current, norm, e.sensor, e.t, cfg);
            const double y = nn::forward_sample(model, sample, false, 0.0, 0, ws);
            estimates[i] = norm.denormalize(y, e.sensor);
        }
    };

    if (threads <= 1 || missing_index.size() < 64) {
        nn::Workspace ws;
        work(0, missing_index.size(), ws);
    } else {
        constexpr std::size_t kChunk = 64;
        const std::size_t n_chunks = (missing_index.size() + kChunk - 1) / kChunk;
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                nn::Workspace ws;
                for (std::size_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) {
                    const std::size_t lo = c * kChunk;
                    work(lo, std::min(missing_index.size(), lo + kChunk), ws);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    std::vector<double> updated = current;
    for (std::size_t i = 0; i < missing_index.size(); ++i) {
        const auto& e = missing_index[i];
        updated[ds.cell(e.t, e.sensor)] = estimates[i];
    }
    return updated;
}

namespace detail {

struct SensorScope {
    std::vector<std::size_t> sensors; // sensors handled by this loop
};

/// The iterative loop over one scope of sensors: repeated fit + predict with
/// weights carried across rounds (unless warm_start is off).
inline void run_scope(const SensorDataset& ds, const TrainConfig& cfg, const SensorScope& scope,
                      const std::vector<EntryRef>& validation_centers, ImputationRun& run,
                      std::uint64_t scope_seed) {
    // In separate mode the scope is one sensor, so "global" statistics reduce
    // to that sensor's own.
    const Normalization norm_kind =
        (cfg.mode == TrainMode::Separate && cfg.normalization == Normalization::GlobalZscore)
            ? Normalization::PerSensorZscore
            : cfg.normalization;
    const Normalizer norm = Normalizer::fit(ds, norm_kind);

    std::vector<EntryRef> scope_validation;
    std::vector<bool> in_scope(ds.num_sensors(), false);
    for (std::size_t s : scope.sensors) in_scope[s] = true;
    for (const auto& e : validation_centers)
        if (in_scope[e.sensor]) scope_validation.push_back(e);

    std::vector<EntryRef> scope_missing;
    for (const auto& e : run.missing_index)
        if (in_scope[e.sensor]) scope_missing.push_back(e);

    const double anchor_span = 2.0 * cfg.w * ds.median_step;
    std::optional<nn::ModelParams> carried;

    for (int round = 0; round < cfg.iter_num; ++round) {
        const std::vector<double>& current = run.series[static_cast<std::size_t>(round)];
        auto train_pairs =
            build_training_pairs(ds, current, norm, cfg, scope_validation, scope.sensors);
        auto val_pairs = build_pairs_at(ds, current, norm, cfg, scope_validation);

        nn::ModelParams start =
            (cfg.warm_start && carried)
                ? *carried
                : nn::init_params({1, cfg.hidden}, cfg.cell_kind,
                                  derive_seed(scope_seed, 0x1000 + round), anchor_span);
        FitResult fr = fit(std::move(start), train_pairs.samples, val_pairs.samples, cfg,
                           derive_seed(scope_seed, 0x2000 + round));
        carried = fr.best_model;

        auto& next = run.series[static_cast<std::size_t>(round) + 1];
        auto updated = predict_missing(fr.best_model, ds, current, scope_missing, norm, cfg);
        for (const auto& e : scope_missing) {
            const std::size_t c = ds.cell(e.t, e.sensor);
            next[c] = updated[c];
        }

        if (static_cast<std::size_t>(round) >= run.validation_mae.size()) {
            run.validation_mae.push_back(0.0);
            run.checkpoints.push_back(fr.best_model);
        } else {
            run.checkpoints[static_cast<std::size_t>(round)] = fr.best_model;
        }
        // weighted pooled validation MAE across scopes
        run.validation_mae[static_cast<std::size_t>(round)] +=
            fr.best_validation_mae * static_cast<double>(val_pairs.samples.size());
    }
}

} // namespace detail

/// Algorithm: statistically initialize T_0, then iter_num rounds of
/// train-on-valid-anchors followed by synchronous re-imputation of the fixed
/// missing index. Mixed mode pools all sensors into one model; separate mode
/// runs the loop once per sensor on its own series.
inline ImputationRun run_cascade(const SensorDataset& ds, const TrainConfig& cfg,
                                 const init::SensorCoordinates& coords = {}) {
    cfg.validate();
    ImputationRun run;
    run.missing_index = build_missing_index(ds);

    run.series.reserve(static_cast<std::size_t>(cfg.iter_num) + 1);
    run.series.push_back(init::initialize(ds, cfg.initializer, coords));
    for (int r = 0; r < cfg.iter_num; ++r) run.series.push_back(run.series.back());

    run.validation_centers = ingest::select_validation_centers(
        ds, cfg.w, cfg.validation_fraction, derive_seed(cfg.seed, 0x5E1EC7));

    if (cfg.mode == TrainMode::Mixed) {
        detail::SensorScope scope;
        for (std::size_t s = 0; s < ds.num_sensors(); ++s) scope.sensors.push_back(s);
        detail::run_scope(ds, cfg, scope, run.validation_centers, run,
                          derive_seed(cfg.seed, 0xC0));
    } else {
        for (std::size_t s = 0; s < ds.num_sensors(); ++s) {
            detail::SensorScope scope;
            scope.sensors.push_back(s);
            detail::run_scope(ds, cfg, scope, run.validation_centers, run,
                              derive_seed(cfg.seed, 0xC0 + 1 + s));
        }
    }

    // run_scope pooled count-weighted sums; divide them back into means
    if (!run.validation_centers.empty())
        for (double& v : run.validation_mae)
            v /= static_cast<double>(run.validation_centers.size());
    return run;
}

} // namespace gapfill::imputer
