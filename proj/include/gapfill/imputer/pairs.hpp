#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "gapfill/core/anchor.hpp"
#include "gapfill/core/types.hpp"
#include "gapfill/error.hpp"
#include "gapfill/imputer/config.hpp"
#include "gapfill/ingest/split.hpp"
#include "gapfill/nn/model.hpp"

namespace gapfill::imputer {

using core::SensorDataset;
using ingest::EntryRef;

/// Z-score statistics fitted on Observed entries only; Holdout values never
/// contribute. `none` keeps raw units.
struct Normalizer {
    Normalization kind = Normalization::GlobalZscore;
    std::vector<double> mean, stdev; // per sensor

    static Normalizer fit(const SensorDataset& ds, Normalization kind) {
        Normalizer n;
        n.kind = kind;
        const std::size_t S = ds.num_sensors();
        n.mean.assign(S, 0.0);
        n.stdev.assign(S, 1.0);
        if (kind == Normalization::None) return n;

        auto moments = [](double sum, double sq, std::size_t cnt, double& mu, double& sd) {
            if (cnt == 0) {
                mu = 0.0;
                sd = 1.0;
                return;
            }
            mu = sum / static_cast<double>(cnt);
            const double var = sq / static_cast<double>(cnt) - mu * mu;
            sd = var > 1e-24 ? std::sqrt(var) : 1.0;
        };

        if (kind == Normalization::GlobalZscore) {
            double sum = 0.0, sq = 0.0;
            std::size_t cnt = 0;
            for (std::size_t t = 0; t < ds.num_timestamps(); ++t)
                for (std::size_t s = 0; s < S; ++s)
                    if (ds.observed(t, s)) {
                        const double v = ds.value(t, s);
                        sum += v;
                        sq += v * v;
                        ++cnt;
                    }
            double mu, sd;
            moments(sum, sq, cnt, mu, sd);
            n.mean.assign(S, mu);
            n.stdev.assign(S, sd);
        } else {
            for (std::size_t s = 0; s < S; ++s) {
                double sum = 0.0, sq = 0.0;
                std::size_t cnt = 0;
                for (std::size_t t = 0; t < ds.num_timestamps(); ++t)
                    if (ds.observed(t, s)) {
                        const double v = ds.value(t, s);
                        sum += v;
                        sq += v * v;
                        ++cnt;
                    }
                moments(sum, sq, cnt, n.mean[s], n.stdev[s]);
            }
        }
        return n;
    }

    double normalize(double v, std::size_t sensor) const { return (v - mean[sensor]) / stdev[sensor]; }
    double denormalize(double v, std::size_t sensor) const { return v * stdev[sensor] + mean[sensor]; }
};

/// Builds the network input for one center from the current dense series.
/// Out-of-range slots feed the normalized-space zero (the training mean).
inline nn::ContextSample make_context(const SensorDataset& ds, const std::vector<double>& dense,
                                      const Normalizer& norm, std::size_t sensor, std::size_t t,
                                      const TrainConfig& cfg) {
    const int w = cfg.w;
    const auto T = static_cast<long>(ds.num_timestamps());
    nn::ContextSample s;
    s.fwd_seq.reserve(static_cast<std::size_t>(w) + 1);
    s.bwd_seq.reserve(static_cast<std::size_t>(w) + 1);

    auto slot_value = [&](long idx) {
        if (idx < 0 || idx >= T) return 0.0;
        return norm.normalize(dense[ds.cell(static_cast<std::size_t>(idx), sensor)], sensor);
    };
    auto slot_time = [&](long idx) {
        if (idx < 0) return ds.timestamps[0] + static_cast<double>(idx) * ds.median_step;
        if (idx >= T)
            return ds.timestamps[static_cast<std::size_t>(T - 1)] +
                   static_cast<double>(idx - (T - 1)) * ds.median_step;
        return ds.timestamps[static_cast<std::size_t>(idx)];
    };

    const auto tc = static_cast<long>(t);
    for (long idx = tc - w; idx <= tc - 1; ++idx) {
        s.fwd_seq.push_back(slot_value(idx));
        s.fwd_times.push_back(slot_time(idx));
    }
    for (long idx = tc + w; idx >= tc + 1; --idx) {
        s.bwd_seq.push_back(slot_value(idx));
        s.bwd_times.push_back(slot_time(idx));
    }
    if (cfg.include_center_input) {
        s.fwd_seq.push_back(slot_value(tc));
        s.fwd_times.push_back(slot_time(tc));
        s.bwd_seq.push_back(slot_value(tc));
        s.bwd_times.push_back(slot_time(tc));
    }
    s.denorm_scale = norm.stdev[sensor];
    return s;
}

struct PairSet {
    std::vector<nn::ContextSample> samples;
    std::vector<EntryRef> centers;
};

/// One (context, label) pair per Observed center with a valid anchor,
/// excluding entries listed in `exclude` (the validation centers). Labels are
/// true observed values; the contexts read the current dense series, so
/// missing slots take their latest imputations.
inline PairSet build_training_pairs(const SensorDataset& ds, const std::vector<double>& dense,
                                    const Normalizer& norm, const TrainConfig& cfg,
                                    const std::vector<EntryRef>& exclude,
                                    std::span<const std::size_t> sensors = {}) {
    PairSet out;
    std::vector<bool> excluded(ds.num_cells(), false);
    for (const auto& e : exclude) excluded[ds.cell(e.t, e.sensor)] = true;

    std::vector<std::size_t> sensor_list;
    if (sensors.empty()) {
        for (std::size_t s = 0; s < ds.num_sensors(); ++s) sensor_list.push_back(s);
    } else {
        sensor_list.assign(sensors.begin(), sensors.end());
    }

    for (std::size_t s : sensor_list) {
        for (std::size_t t = 0; t < ds.num_timestamps(); ++t) {
            if (!ds.observed(t, s) || excluded[ds.cell(t, s)]) continue;
            const auto anchor = core::extract_anchor(ds, s, t, cfg.w);
            if (!core::is_valid_anchor(anchor)) continue;
            auto sample = make_context(ds, dense, norm, s, t, cfg);
            sample.target = norm.normalize(ds.value(t, s), s);
            out.samples.push_back(std::move(sample));
            out.centers.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(t)});
        }
    }
    return out;
}

/// Contexts for a fixed list of centers (validation pairs), labels from the
/// observed values. Centers must be Observed.
inline PairSet build_pairs_at(const SensorDataset& ds, const std::vector<double>& dense,
                              const Normalizer& norm, const TrainConfig& cfg,
                              const std::vector<EntryRef>& centers) {
    PairSet out;
    for (const auto& e : centers) {
        if (!ds.observed(e.t, e.sensor))
            throw config_error("validation center is not an observed entry");
        auto sample = make_context(ds, dense, norm, e.sensor, e.t, cfg);
        sample.target = norm.normalize(ds.value(e.t, e.sensor), e.sensor);
        out.samples.push_back(std::move(sample));
        out.centers.push_back(e);
    }
    return out;
}

} // namespace gapfill::imputer
