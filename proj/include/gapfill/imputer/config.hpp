#pragma once

#include <cstdint>
#include <string>
#include <thread>

#include "gapfill/error.hpp"
#include "gapfill/init/initialize.hpp"
#include "gapfill/nn/cell.hpp"
#include "gapfill/nn/nadam.hpp"

namespace gapfill::imputer {

enum class TrainMode : std::uint8_t { Mixed, Separate };
enum class Normalization : std::uint8_t { GlobalZscore, PerSensorZscore, None };

inline const char* train_mode_name(TrainMode m) { return m == TrainMode::Mixed ? "mixed" : "separate"; }
inline const char* normalization_name(Normalization n) {
    switch (n) {
        case Normalization::GlobalZscore: return "global_zscore";
        case Normalization::PerSensorZscore: return "per_sensor_zscore";
        case Normalization::None: return "none";
    }
    return "?";
}

struct TrainConfig {
    int w = 12;                 // half-window; anchors span 2w+1 entries
    std::size_t hidden = 50;
    double dropout = 0.3;
    int iter_num = 3;           // refinement rounds
    std::size_t batch_size = 128;
    int max_epochs = 50;
    int patience = 5;           // epochs without validation improvement before stopping
    std::uint64_t seed = 0;
    nn::CellKind cell_kind = nn::CellKind::Standard;
    TrainMode mode = TrainMode::Mixed;
    bool include_center_input = false;
    Normalization normalization = Normalization::GlobalZscore;
    double validation_fraction = 0.1;
    bool warm_start = true;     // carry weights across rounds; off = retrain from scratch
    nn::NadamConfig optimizer;
    init::InitializerKind initializer;
    int threads = 0;            // 0 = hardware concurrency
    bool deterministic = false; // force single-threaded fixed-order execution

    void validate() const {
        if (w < 1) throw config_error("config: w must be >= 1");
        if (hidden < 1) throw config_error("config: hidden must be >= 1");
        if (!(dropout >= 0.0 && dropout < 1.0)) throw config_error("config: dropout must be in [0,1)");
        if (iter_num < 1) throw config_error("config: iter_num must be >= 1");
        if (batch_size < 1) throw config_error("config: batch_size must be >= 1");
        if (max_epochs < 1) throw config_error("config: max_epochs must be >= 1");
        if (patience < 0) throw config_error("config: patience must be >= 0");
        if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
            throw config_error("config: validation_fraction must be in (0,1)");
        initializer.validate();
    }

    int effective_threads() const {
        if (deterministic) return 1;
        if (threads > 0) return threads;
        const unsigned hc = std::thread::hardware_concurrency();
        return hc == 0 ? 1 : static_cast<int>(hc);
    }
};

} // namespace gapfill::imputer
