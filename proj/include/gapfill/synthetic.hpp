#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "gapfill/core/types.hpp"
#include "gapfill/error.hpp"
#include "gapfill/util/rng.hpp"

namespace gapfill::synth {

/// Sensors share a common trend (three sinusoids) with small per-sensor phase
/// offsets and amplitude jitter, plus Gaussian noise. With default jitter the
/// generated sensor series are strongly correlated.
struct SyntheticSpec {
    std::size_t sensors = 3;
    std::size_t steps = 2000;
    std::uint64_t seed = 1;
    double offset = 50.0;
    double noise_sigma = 1.0;
    double amp_jitter = 0.1;   // relative, uniform in [1-j, 1+j]
    double phase_jitter = 0.15; // radians, uniform in [-p, p]

    void validate() const {
        if (sensors < 1) throw config_error("gen: sensors must be >= 1");
        if (steps < 2) throw config_error("gen: steps must be >= 2");
        if (noise_sigma < 0.0) throw config_error("gen: noise must be >= 0");
    }

    std::string describe() const {
        return "gen sensors=" + std::to_string(sensors) + " steps=" + std::to_string(steps) +
               " seed=" + std::to_string(seed) + " offset=" + std::to_string(offset) +
               " noise=" + std::to_string(noise_sigma) + " amp_jitter=" + std::to_string(amp_jitter) +
               " phase_jitter=" + std::to_string(phase_jitter) +
               " components=sin(24h),sin(168h),sin(480h) amplitudes=10,5,3";
    }
};

inline constexpr double kSynthPeriods[3] = {24.0, 168.0, 480.0};
inline constexpr double kSynthAmplitudes[3] = {10.0, 5.0, 3.0};
inline constexpr double kSynthBasePhases[3] = {0.0, 0.7, 1.4};

/// The noiseless signal for sensor 0 (no jitter); used by tests.
inline double synth_clean_value(const SyntheticSpec& spec, double t_hours) {
    double v = spec.offset;
    for (int k = 0; k < 3; ++k)
        v += kSynthAmplitudes[k] *
             std::sin(2.0 * std::numbers::pi * t_hours / kSynthPeriods[k] + kSynthBasePhases[k]);
    return v;
}

inline core::SensorDataset generate(const SyntheticSpec& spec) {
    spec.validate();
    core::SensorDataset ds;
    ds.variable_name = "synthetic";
    ds.ts_kind = core::TimestampKind::EpochHours;
    for (std::size_t s = 0; s < spec.sensors; ++s) ds.sensor_ids.push_back("S" + std::to_string(s));
    ds.timestamps.resize(spec.steps);
    for (std::size_t t = 0; t < spec.steps; ++t) ds.timestamps[t] = static_cast<double>(t);

    Rng rng = make_rng(spec.seed);
    std::uniform_real_distribution<double> amp_u(1.0 - spec.amp_jitter, 1.0 + spec.amp_jitter);
    std::uniform_real_distribution<double> phase_u(-spec.phase_jitter, spec.phase_jitter);
    std::normal_distribution<double> noise(0.0, 1.0);

    // per-sensor jitters drawn first so the layout is stable
    std::vector<std::array<double, 3>> amp(spec.sensors), phase(spec.sensors);
    for (std::size_t s = 0; s < spec.sensors; ++s)
        for (int k = 0; k < 3; ++k) {
            amp[s][k] = spec.amp_jitter > 0.0 ? amp_u(rng) : 1.0;
            phase[s][k] = spec.phase_jitter > 0.0 ? phase_u(rng) : 0.0;
        }

    const std::size_t T = spec.steps, S = spec.sensors;
    ds.values.assign(T * S, 0.0);
    ds.mask.assign(T * S, core::MaskState::Observed);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t t = 0; t < T; ++t) {
            double v = spec.offset;
            for (int k = 0; k < 3; ++k)
                v += kSynthAmplitudes[k] * amp[s][k] *
                     std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / kSynthPeriods[k] +
                              kSynthBasePhases[k] + phase[s][k]);
            if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise(rng);
            ds.values[ds.cell(t, s)] = v;
        }
    }
    ds.truth.resize(T * S);
    ds.finalize();
    return ds;
}

} // namespace gapfill::synth
