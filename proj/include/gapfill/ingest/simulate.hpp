#pragma once

#include <cstdint>
#include <vector>

#include "gapfill/core/anchor.hpp"
#include "gapfill/core/types.hpp"
#include "gapfill/error.hpp"
#include "gapfill/util/rng.hpp"

namespace gapfill::ingest {

using core::MaskState;
using core::SensorDataset;

enum class MissingMechanism : std::uint8_t {
    RandomRate,       // exact-count uniform MCAR holdout
    PositionCopy,     // copy missing positions from one period into another
    RandomFraction20, // RandomRate fixed at 20%
    BlockInjection    // contiguous runs of holdout
};

struct MissingSpec {
    MissingMechanism mechanism = MissingMechanism::RandomRate;
    double rate = 0.2;
    std::size_t block_min = 3;
    std::size_t block_max = 12;
    std::uint64_t seed = 0;
};

namespace detail {

inline void hold_out(SensorDataset& ds, std::size_t cell) {
    ds.truth.set(cell, ds.values[cell]);
    ds.values[cell] = std::numeric_limits<double>::quiet_NaN();
    ds.mask[cell] = MaskState::Holdout;
}

} // namespace detail

/// Converts exactly floor(rate * #Observed) uniformly chosen Observed entries
/// to Holdout. Exact-count sampling, deterministic given the seed.
inline SensorDataset simulate_missing(const SensorDataset& input, const MissingSpec& spec) {
    double rate = spec.rate;
    if (spec.mechanism == MissingMechanism::RandomFraction20) rate = 0.2;
    if (rate < 0.0 || rate >= 1.0) throw config_error("simulate_missing: rate must be in [0,1)");
    if (spec.mechanism == MissingMechanism::PositionCopy)
        throw config_error("simulate_missing: position-copy requires explicit periods; use holdout_position_copy");
    if (spec.mechanism == MissingMechanism::BlockInjection && (spec.block_min < 1 || spec.block_max < spec.block_min))
        throw config_error("simulate_missing: block length bounds must satisfy 1 <= min <= max");

    SensorDataset ds = input;
    std::vector<std::size_t> observed;
    observed.reserve(ds.num_cells());
    for (std::size_t s = 0; s < ds.num_sensors(); ++s)
        for (std::size_t t = 0; t < ds.num_timestamps(); ++t)
            if (ds.observed(t, s)) observed.push_back(ds.cell(t, s));

    const auto target = static_cast<std::size_t>(rate * static_cast<double>(observed.size()));
    if (target == 0) return ds;

    Rng rng = make_rng(spec.seed);
    if (spec.mechanism == MissingMechanism::BlockInjection) {
        const std::size_t T = ds.num_timestamps(), S = ds.num_sensors();
        std::uniform_int_distribution<std::size_t> pick_sensor(0, S - 1);
        std::uniform_int_distribution<std::size_t> pick_start(0, T - 1);
        std::uniform_int_distribution<std::size_t> pick_len(spec.block_min, spec.block_max);
        std::size_t converted = 0;
        std::size_t attempts = 0;
        const std::size_t max_attempts = 10000 + 100 * target;
        while (converted < target && attempts < max_attempts) {
            ++attempts;
            const std::size_t s = pick_sensor(rng);
            const std::size_t start = pick_start(rng);
            const std::size_t len = pick_len(rng);
            for (std::size_t t = start; t < std::min(T, start + len) && converted < target; ++t) {
                const std::size_t c = ds.cell(t, s);
                if (ds.mask[c] == MaskState::Observed) {
                    detail::hold_out(ds, c);
                    ++converted;
                }
            }
        }
    } else {
        auto chosen = sample_without_replacement(observed.size(), target, rng);
        for (std::size_t i : chosen) detail::hold_out(ds, observed[i]);
    }
    return ds;
}

/// Time-index span [start, start+length) used by the position-copy holdout.
struct Period {
    std::size_t start = 0;
    std::size_t length = 0;
};

/// For every (sensor, offset) missing in the source period, the corresponding
/// Observed entry in the target period becomes Holdout.
inline SensorDataset holdout_position_copy(const SensorDataset& input, Period source, Period target) {
    if (source.length != target.length)
        throw config_error("holdout_position_copy: periods must have equal length");
    const std::size_t T = input.num_timestamps();
    if (source.start + source.length > T || target.start + target.length > T)
        throw config_error("holdout_position_copy: period out of dataset range");

    SensorDataset ds = input;
    for (std::size_t s = 0; s < ds.num_sensors(); ++s) {
        for (std::size_t off = 0; off < source.length; ++off) {
            if (!ds.observed(source.start + off, s)) {
                const std::size_t c = ds.cell(target.start + off, s);
                if (ds.mask[c] == MaskState::Observed) detail::hold_out(ds, c);
            }
        }
    }
    return ds;
}

/// Locates the calendar month `year`-`month` as a timestamp-index period.
inline Period month_period(const SensorDataset& ds, int year, int month) {
    if (!ds.has_calendar()) throw config_error("month periods require ISO-8601 timestamps");
    Period p;
    bool found = false;
    for (std::size_t t = 0; t < ds.num_timestamps(); ++t) {
        if (ds.calendar[t].year == year && ds.calendar[t].month == month) {
            if (!found) {
                p.start = t;
                found = true;
            }
            p.length = t - p.start + 1;
        } else if (found && p.length > 0 && t > p.start + p.length - 1) {
            break;
        }
    }
    if (!found) throw config_error("month not present in dataset");
    return p;
}

} // namespace gapfill::ingest
