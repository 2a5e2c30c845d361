#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gapfill/core/types.hpp"
#include "gapfill/error.hpp"

namespace gapfill::init {

using core::MaskState;
using core::SensorDataset;

enum class InitializerMethod : std::uint8_t {
    TemporalNearest, // nearest observed value in time, ties to the earlier side
    WindowMean,      // mean of observed entries within +-width index slots
    GlobalMean,      // the sensor's whole-series observed mean
    SpatialTemporalCombo // equal-weight blend of IDW cross-sensor and SES temporal estimates
};

struct InitializerKind {
    InitializerMethod method = InitializerMethod::TemporalNearest;
    std::size_t width = 12;    // WindowMean
    double idw_power = 2.0;    // SpatialTemporalCombo
    double ses_alpha = 0.5;    // SpatialTemporalCombo

    void validate() const {
        if (method == InitializerMethod::WindowMean && width < 1)
            throw config_error("initializer: window width must be >= 1");
        if (method == InitializerMethod::SpatialTemporalCombo) {
            if (!(idw_power > 0.0)) throw config_error("initializer: idw_power must be > 0");
            if (!(ses_alpha > 0.0 && ses_alpha <= 1.0))
                throw config_error("initializer: ses_alpha must be in (0,1]");
        }
    }
};

inline const char* initializer_name(InitializerMethod m) {
    switch (m) {
        case InitializerMethod::TemporalNearest: return "temporal-nearest";
        case InitializerMethod::WindowMean: return "window-mean";
        case InitializerMethod::GlobalMean: return "global-mean";
        case InitializerMethod::SpatialTemporalCombo: return "spatial-temporal";
    }
    return "?";
}

inline std::optional<InitializerMethod> initializer_from_name(const std::string& name) {
    if (name == "temporal-nearest") return InitializerMethod::TemporalNearest;
    if (name == "window-mean") return InitializerMethod::WindowMean;
    if (name == "global-mean") return InitializerMethod::GlobalMean;
    if (name == "spatial-temporal") return InitializerMethod::SpatialTemporalCombo;
    return std::nullopt;
}

/// Inverse-distance weights over the other sensors, normalized to sum 1.
/// Co-located sensors (distance 0) share all the weight.
inline std::vector<double> spatial_weights(const std::vector<std::pair<double, double>>& positions,
                                           std::size_t target, double power) {
    if (target >= positions.size()) throw config_error("spatial_weights: target out of range");
    if (!(power > 0.0)) throw config_error("spatial_weights: power must be > 0");
    const std::size_t n = positions.size();
    std::vector<double> w(n, 0.0);
    bool any_zero = false;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == target) continue;
        const double dx = positions[j].first - positions[target].first;
        const double dy = positions[j].second - positions[target].second;
        const double d = std::sqrt(dx * dx + dy * dy);
        if (d == 0.0) {
            any_zero = true;
            w[j] = 1.0;
        } else if (!any_zero) {
            w[j] = std::pow(d, -power);
        }
    }
    if (any_zero) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == target) continue;
            const double dx = positions[j].first - positions[target].first;
            const double dy = positions[j].second - positions[target].second;
            w[j] = (dx == 0.0 && dy == 0.0) ? 1.0 : 0.0;
        }
    }
    double sum = 0.0;
    for (double v : w) sum += v;
    if (sum <= 0.0) throw config_error("spatial_weights: no contributing sensors");
    for (double& v : w) v /= sum;
    return w;
}

namespace detail {

/// Nearest observed value in timestamp distance; ties break to the earlier side.
inline std::optional<double> temporal_nearest_at(const SensorDataset& ds, std::size_t sensor,
                                                 std::size_t t) {
    std::optional<std::size_t> before, after;
    for (std::size_t i = t + 1; i-- > 0;) {
        if (ds.observed(i, sensor)) {
            before = i;
            break;
        }
        if (i == 0) break;
    }
    for (std::size_t i = t; i < ds.num_timestamps(); ++i) {
        if (ds.observed(i, sensor)) {
            after = i;
            break;
        }
    }
    if (!before && !after) return std::nullopt;
    if (!before) return ds.value(*after, sensor);
    if (!after) return ds.value(*before, sensor);
    const double db = ds.timestamps[t] - ds.timestamps[*before];
    const double da = ds.timestamps[*after] - ds.timestamps[t];
    return db <= da ? ds.value(*before, sensor) : ds.value(*after, sensor);
}

inline std::optional<double> window_mean_at(const SensorDataset& ds, std::size_t sensor,
                                            std::size_t t, std::size_t width) {
    double sum = 0.0;
    std::size_t n = 0;
    const std::size_t lo = t >= width ? t - width : 0;
    const std::size_t hi = std::min(ds.num_timestamps() - 1, t + width);
    for (std::size_t i = lo; i <= hi; ++i) {
        if (ds.observed(i, sensor)) {
            sum += ds.value(i, sensor);
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

/// Single-pass simple exponential smoothing over observed values only; the
/// estimate at each position is the state after the last preceding observation.
inline std::vector<std::optional<double>> ses_estimates(const SensorDataset& ds, std::size_t sensor,
                                                        double alpha) {
    std::vector<std::optional<double>> est(ds.num_timestamps());
    std::optional<double> state;
    for (std::size_t t = 0; t < ds.num_timestamps(); ++t) {
        est[t] = state;
        if (ds.observed(t, sensor)) {
            const double x = ds.value(t, sensor);
            state = state ? alpha * x + (1.0 - alpha) * *state : x;
        }
    }
    return est;
}

} // namespace detail

struct SensorCoordinates {
    std::vector<std::pair<double, double>> positions; // aligned with dataset sensor order
    bool available = false;
};

inline SensorCoordinates align_coordinates(
    const SensorDataset& ds, const std::unordered_map<std::string, std::pair<double, double>>& by_id) {
    SensorCoordinates sc;
    sc.positions.resize(ds.num_sensors(), {0.0, 0.0});
    if (by_id.empty()) return sc;
    for (std::size_t s = 0; s < ds.num_sensors(); ++s) {
        auto it = by_id.find(ds.sensor_ids[s]);
        if (it == by_id.end()) throw config_error("coordinates missing for sensor " + ds.sensor_ids[s]);
        sc.positions[s] = it->second;
    }
    sc.available = true;
    return sc;
}

/// Fills every non-observed entry with a finite estimate; observed entries
/// pass through unchanged. Returns the dense [time x sensor] matrix.
inline std::vector<double> initialize(const SensorDataset& ds, const InitializerKind& kind,
                                      const SensorCoordinates& coords = {}) {
    kind.validate();
    const std::size_t T = ds.num_timestamps(), S = ds.num_sensors();

    std::vector<double> sensor_mean(S, 0.0);
    std::vector<std::size_t> sensor_obs(S, 0);
    double all_sum = 0.0;
    std::size_t all_n = 0;
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t t = 0; t < T; ++t) {
            if (ds.observed(t, s)) {
                sensor_mean[s] += ds.value(t, s);
                ++sensor_obs[s];
            }
        }
        all_sum += sensor_mean[s];
        all_n += sensor_obs[s];
        if (sensor_obs[s] > 0) sensor_mean[s] /= static_cast<double>(sensor_obs[s]);
    }
    if (all_n == 0) throw data_error("initialize: dataset has no observed entries");
    const double global_mean = all_sum / static_cast<double>(all_n);

    // Per-sensor fallback chain: sensor mean, then all-sensors mean.
    auto fallback = [&](std::size_t s) {
        return sensor_obs[s] > 0 ? sensor_mean[s] : global_mean;
    };
    auto nearest_or_fallback = [&](std::size_t s, std::size_t t) {
        auto v = detail::temporal_nearest_at(ds, s, t);
        return v ? *v : fallback(s);
    };

    std::vector<double> dense(T * S);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t s = 0; s < S; ++s)
            dense[ds.cell(t, s)] = ds.observed(t, s) ? ds.value(t, s) : 0.0;

    std::vector<std::vector<std::optional<double>>> ses;
    std::vector<std::vector<double>> idw; // per-sensor weight rows
    if (kind.method == InitializerMethod::SpatialTemporalCombo) {
        ses.resize(S);
        for (std::size_t s = 0; s < S; ++s) ses[s] = detail::ses_estimates(ds, s, kind.ses_alpha);
        idw.resize(S);
        for (std::size_t s = 0; s < S; ++s) {
            if (coords.available && S > 1) {
                idw[s] = spatial_weights(coords.positions, s, kind.idw_power);
            } else {
                // no coordinates: uniform weights over the other sensors
                idw[s].assign(S, S > 1 ? 1.0 / static_cast<double>(S - 1) : 0.0);
                idw[s][s] = 0.0;
            }
        }
    }

    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t t = 0; t < T; ++t) {
            if (ds.observed(t, s)) continue;
            const std::size_t c = ds.cell(t, s);
            switch (kind.method) {
                case InitializerMethod::TemporalNearest:
                    dense[c] = nearest_or_fallback(s, t);
                    break;
                case InitializerMethod::WindowMean: {
                    auto v = detail::window_mean_at(ds, s, t, kind.width);
                    dense[c] = v ? *v : nearest_or_fallback(s, t);
                    break;
                }
                case InitializerMethod::GlobalMean:
                    dense[c] = fallback(s);
                    break;
                case InitializerMethod::SpatialTemporalCombo: {
                    std::optional<double> spatial;
                    double wsum = 0.0, acc = 0.0;
                    for (std::size_t j = 0; j < S; ++j) {
                        if (j == s || !ds.observed(t, j) || idw[s][j] <= 0.0) continue;
                        acc += idw[s][j] * ds.value(t, j);
                        wsum += idw[s][j];
                    }
                    if (wsum > 0.0) spatial = acc / wsum;
                    const std::optional<double> temporal = ses[s][t];
                    if (spatial && temporal)
                        dense[c] = 0.5 * (*spatial + *temporal);
                    else if (spatial)
                        dense[c] = *spatial;
                    else if (temporal)
                        dense[c] = *temporal;
                    else
                        dense[c] = nearest_or_fallback(s, t);
                    break;
                }
            }
        }
    }

    for (double v : dense)
        if (!std::isfinite(v)) throw numeric_error("initialize: produced non-finite estimate");
    return dense;
}

} // namespace gapfill::init
