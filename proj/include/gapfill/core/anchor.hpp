#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "gapfill/core/types.hpp"

namespace gapfill::core {

struct AnchorSlot {
    double value = std::numeric_limits<double>::quiet_NaN();
    bool observed = false;
};

/// Fixed-length window of 2w+1 entries centered on a target entry. Slots that
/// fall outside the series are padding: unobserved, with extrapolated timestamps.
struct Anchor {
    std::size_t sensor = 0;
    std::size_t center = 0;
    int half_window = 0;
    std::vector<AnchorSlot> slots; // 2w+1, center at index half_window
    std::vector<double> times;     // 2w+1
    bool center_observed = false;
    int observed_count = 0; // over the full window, center included

    int width() const { return 2 * half_window + 1; }
    const AnchorSlot& left(int j) const { return slots[j]; }                    // j in [0, w)
    const AnchorSlot& right(int j) const { return slots[half_window + 1 + j]; } // j in [0, w)
    const AnchorSlot& center_slot() const { return slots[half_window]; }
};

/// An anchor is usable for training iff strictly more than half its entries are observed.
inline bool is_valid_anchor(const Anchor& a) {
    return 2 * a.observed_count > 2 * a.half_window + 1;
}

inline Anchor extract_anchor(const SensorDataset& ds, std::size_t sensor, std::size_t t, int w) {
    if (sensor >= ds.num_sensors()) throw std::out_of_range("extract_anchor: sensor out of range");
    if (t >= ds.num_timestamps()) throw std::out_of_range("extract_anchor: index out of range");
    if (w < 1) throw config_error("extract_anchor: half-window must be >= 1");

    Anchor a;
    a.sensor = sensor;
    a.center = t;
    a.half_window = w;
    a.slots.resize(static_cast<std::size_t>(2 * w + 1));
    a.times.resize(static_cast<std::size_t>(2 * w + 1));

    const long T = static_cast<long>(ds.num_timestamps());
    for (int j = -w; j <= w; ++j) {
        const long idx = static_cast<long>(t) + j;
        AnchorSlot& slot = a.slots[static_cast<std::size_t>(j + w)];
        double& time = a.times[static_cast<std::size_t>(j + w)];
        if (idx >= 0 && idx < T) {
            const auto u = static_cast<std::size_t>(idx);
            slot.observed = ds.observed(u, sensor);
            slot.value = slot.observed ? ds.value(u, sensor) : std::numeric_limits<double>::quiet_NaN();
            time = ds.timestamps[u];
        } else if (idx < 0) {
            time = ds.timestamps[0] + static_cast<double>(idx) * ds.median_step;
        } else {
            time = ds.timestamps[T - 1] + static_cast<double>(idx - (T - 1)) * ds.median_step;
        }
        if (slot.observed) ++a.observed_count;
    }
    a.center_observed = a.center_slot().observed;
    return a;
}

} // namespace gapfill::core
