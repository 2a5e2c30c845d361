#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gapfill/cli/config_io.hpp"
#include "gapfill/cli/manifest.hpp"
#include "gapfill/eval/report_io.hpp"
#include "gapfill/imputer/cascade.hpp"
#include "gapfill/ingest/csv.hpp"
#include "gapfill/ingest/simulate.hpp"
#include "gapfill/nn/checkpoint.hpp"
#include "gapfill/synthetic.hpp"

namespace gapfill::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitInternal = 1;

namespace fs = std::filesystem;

/// --out flag, falling back to $GAPFILL_OUT_DIR, then the working directory.
inline fs::path resolve_out_dir(const std::string& out_flag) {
    if (!out_flag.empty()) return fs::path(out_flag);
    if (const char* env = std::getenv("GAPFILL_OUT_DIR")) return fs::path(env);
    return fs::path(".");
}

namespace detail {

struct ErrorInfo {
    int code = kExitOk;
    std::string category, message;
};

template <typename Fn>
ErrorInfo run_guarded(Fn&& fn) {
    try {
        fn();
        return {};
    } catch (const config_error& e) {
        return {kExitConfig, "config", e.what()};
    } catch (const data_error& e) {
        return {kExitData, "data", e.what()};
    } catch (const numeric_error& e) {
        return {kExitNumeric, "numeric", e.what()};
    } catch (const std::exception& e) {
        return {kExitInternal, "internal", e.what()};
    }
}

inline int finish(RunManifest& m, const ErrorInfo& err, const fs::path& manifest_path) {
    m.finished = now_iso8601();
    if (err.code != kExitOk) {
        m.status = "error";
        m.error_category = err.category;
        m.error_message = err.message;
        std::fprintf(stderr, "gapfill: %s error: %s\n", err.category.c_str(), err.message.c_str());
    }
    try {
        m.write(manifest_path.string());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "gapfill: cannot write manifest: %s\n", e.what());
        return err.code == kExitOk ? kExitData : err.code;
    }
    return err.code;
}

/// Reads a dense CSV (written by `run`) back as a value matrix aligned with `ds`.
inline std::vector<double> load_dense_aligned(const core::SensorDataset& ds, const std::string& path) {
    const auto dense_ds = ingest::load_csv(path);
    if (dense_ds.num_timestamps() != ds.num_timestamps())
        throw data_error(path + ": timestamp count does not match the dataset");
    for (std::size_t t = 0; t < ds.num_timestamps(); ++t)
        if (dense_ds.timestamps[t] != ds.timestamps[t])
            throw data_error(path + ": timestamps do not match the dataset");
    std::vector<std::size_t> map(ds.num_sensors());
    for (std::size_t s = 0; s < ds.num_sensors(); ++s) {
        bool found = false;
        for (std::size_t q = 0; q < dense_ds.num_sensors(); ++q) {
            if (dense_ds.sensor_ids[q] == ds.sensor_ids[s]) {
                map[s] = q;
                found = true;
                break;
            }
        }
        if (!found) throw data_error(path + ": sensor " + ds.sensor_ids[s] + " missing");
    }
    std::vector<double> out(ds.num_cells());
    for (std::size_t t = 0; t < ds.num_timestamps(); ++t) {
        for (std::size_t s = 0; s < ds.num_sensors(); ++s) {
            if (!dense_ds.observed(t, map[s]))
                throw data_error(path + ": dense series has an empty cell");
            out[ds.cell(t, s)] = dense_ds.value(t, map[s]);
        }
    }
    return out;
}

inline std::vector<double> parse_rate_list(const std::string& csv) {
    std::vector<double> rates;
    std::string tok;
    std::stringstream ss(csv);
    while (std::getline(ss, tok, ',')) {
        auto v = parse_double(tok);
        if (!v) throw config_error("sweep: non-numeric rate token '" + tok + "'");
        rates.push_back(*v);
    }
    return rates;
}

} // namespace detail

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenOptions {
    synth::SyntheticSpec spec;
    std::string out_csv; // default <out_dir>/synthetic.csv
    std::string out_dir;
};

inline int cmd_gen(const GenOptions& opt) {
    RunManifest m;
    m.command = "gen";
    m.seed = opt.spec.seed;
    m.started = now_iso8601();
    const fs::path out_dir = resolve_out_dir(opt.out_dir);
    fs::create_directories(out_dir);
    const fs::path out_csv =
        opt.out_csv.empty() ? out_dir / "synthetic.csv" : fs::path(opt.out_csv);
    const auto err = detail::run_guarded([&] {
        const auto ds = synth::generate(opt.spec);
        ingest::save_csv(ds, out_csv.string(), opt.spec.describe());
        m.outputs.push_back(out_csv.string());
        m.config = {{"sensors", opt.spec.sensors}, {"steps", opt.spec.steps},
                    {"seed", opt.spec.seed},       {"offset", opt.spec.offset},
                    {"noise", opt.spec.noise_sigma}, {"amp_jitter", opt.spec.amp_jitter},
                    {"phase_jitter", opt.spec.phase_jitter}};
    });
    return detail::finish(m, err, out_dir / "manifest.json");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
    std::string input_csv;
    std::string mechanism = "random-rate"; // random-rate | fraction20 | block | position-copy
    double rate = 0.2;
    std::size_t block_min = 3, block_max = 12;
    std::string source_month, target_month; // "YYYY-MM" for position-copy
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string out_csv, out_truth; // defaults under out_dir
};

inline int cmd_simulate(const SimulateOptions& opt) {
    RunManifest m;
    m.command = "simulate";
    m.seed = opt.seed;
    m.started = now_iso8601();
    const fs::path out_dir = resolve_out_dir(opt.out_dir);
    fs::create_directories(out_dir);
    const fs::path out_csv = opt.out_csv.empty() ? out_dir / "held.csv" : fs::path(opt.out_csv);
    const fs::path out_truth =
        opt.out_truth.empty() ? out_dir / "truth.csv" : fs::path(opt.out_truth);

    const auto err = detail::run_guarded([&] {
        auto ds = ingest::load_csv(opt.input_csv);
        m.add_input(opt.input_csv);
        core::SensorDataset held;
        if (opt.mechanism == "position-copy") {
            auto parse_month = [](const std::string& s) {
                int y = 0, mo = 0;
                if (std::sscanf(s.c_str(), "%d-%d", &y, &mo) != 2 || mo < 1 || mo > 12)
                    throw config_error("simulate: expected month as YYYY-MM, got '" + s + "'");
                return std::make_pair(y, mo);
            };
            if (opt.source_month.empty() || opt.target_month.empty())
                throw config_error("simulate: position-copy requires --source and --target months");
            const auto [sy, sm] = parse_month(opt.source_month);
            const auto [ty, tm] = parse_month(opt.target_month);
            const auto src = ingest::month_period(ds, sy, sm);
            const auto dst = ingest::month_period(ds, ty, tm);
            // align on the shorter span so 30/31-day months can pair up
            const std::size_t len = std::min(src.length, dst.length);
            held = ingest::holdout_position_copy(ds, {src.start, len}, {dst.start, len});
        } else {
            ingest::MissingSpec spec;
            spec.rate = opt.rate;
            spec.seed = opt.seed;
            spec.block_min = opt.block_min;
            spec.block_max = opt.block_max;
            if (opt.mechanism == "random-rate")
                spec.mechanism = ingest::MissingMechanism::RandomRate;
            else if (opt.mechanism == "fraction20")
                spec.mechanism = ingest::MissingMechanism::RandomFraction20;
            else if (opt.mechanism == "block")
                spec.mechanism = ingest::MissingMechanism::BlockInjection;
            else
                throw config_error("simulate: unknown mechanism '" + opt.mechanism + "'");
            held = ingest::simulate_missing(ds, spec);
        }
        ingest::save_csv(held, out_csv.string());
        ingest::save_truth(held, out_truth.string());
        m.outputs.push_back(out_csv.string());
        m.outputs.push_back(out_truth.string());
        m.config = {{"mechanism", opt.mechanism}, {"rate", opt.rate}, {"seed", opt.seed}};
    });
    return detail::finish(m, err, out_dir / "manifest.json");
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunOptions {
    std::string input_csv;
    std::string truth_csv;  // optional; enables scoring
    std::string coords_csv; // optional
    std::string config_path;
    ConfigOverrides overrides;
    std::size_t block_threshold = 11;
    std::string out_dir;
};

inline int cmd_run(const RunOptions& opt) {
    RunManifest m;
    m.command = "run";
    m.started = now_iso8601();
    const fs::path out_dir = resolve_out_dir(opt.out_dir);
    fs::create_directories(out_dir);

    const auto err = detail::run_guarded([&] {
        const TrainConfig cfg = resolve_config(opt.config_path, opt.overrides);
        m.config = config_to_json(cfg);
        m.seed = cfg.seed;

        auto ds = ingest::load_csv(opt.input_csv);
        m.add_input(opt.input_csv);
        if (!opt.truth_csv.empty()) {
            ingest::load_truth(ds, opt.truth_csv);
            m.add_input(opt.truth_csv);
        }
        init::SensorCoordinates coords;
        if (!opt.coords_csv.empty()) {
            coords = init::align_coordinates(ds, ingest::load_coordinates(opt.coords_csv));
            m.add_input(opt.coords_csv);
        }
        if (!opt.config_path.empty()) m.add_input(opt.config_path);

        const auto run = imputer::run_cascade(ds, cfg, coords);
        for (std::size_t i = 0; i < run.series.size(); ++i) {
            const fs::path p = out_dir / ("T_" + std::to_string(i) + ".csv");
            ingest::save_dense_csv(ds, run.series[i], p.string());
            m.outputs.push_back(p.string());
        }
        for (std::size_t r = 0; r < run.checkpoints.size(); ++r) {
            const fs::path p = out_dir / ("checkpoint_round_" + std::to_string(r + 1) + ".json");
            nn::save_checkpoint(run.checkpoints[r], p.string());
            m.outputs.push_back(p.string());
            m.checkpoints.push_back(p.string());
        }
        m.validation_mae = run.validation_mae;

        if (ds.truth.count() > 0) {
            const auto blocks = core::classify_blocks(ds, opt.block_threshold);
            const auto report = eval::score(run, ds, blocks);
            const fs::path pj = out_dir / "report.json", pc = out_dir / "report.csv";
            eval::save_report(report, pj.string(), pc.string());
            m.outputs.push_back(pj.string());
            m.outputs.push_back(pc.string());
        }
    });
    return detail::finish(m, err, out_dir / "manifest.json");
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepOptions {
    std::string input_csv;
    std::string rates; // comma-separated; empty = defaults
    std::string config_path;
    ConfigOverrides overrides;
    std::size_t block_threshold = 11;
    std::string out_dir;
};

inline int cmd_sweep(const SweepOptions& opt) {
    RunManifest m;
    m.command = "sweep";
    m.started = now_iso8601();
    const fs::path out_dir = resolve_out_dir(opt.out_dir);
    fs::create_directories(out_dir);

    const auto err = detail::run_guarded([&] {
        const TrainConfig cfg = resolve_config(opt.config_path, opt.overrides);
        m.config = config_to_json(cfg);
        m.seed = cfg.seed;
        std::vector<double> rates;
        if (!opt.rates.empty()) rates = detail::parse_rate_list(opt.rates);
        auto ds = ingest::load_csv(opt.input_csv);
        m.add_input(opt.input_csv);
        if (!opt.config_path.empty()) m.add_input(opt.config_path);

        const auto rows = eval::sweep_missing_rates(ds, rates, cfg, opt.block_threshold);
        const fs::path pj = out_dir / "sweep.json", pc = out_dir / "sweep.csv";
        eval::save_sweep_report(rows, pj.string(), pc.string());
        m.outputs.push_back(pj.string());
        m.outputs.push_back(pc.string());
    });
    return detail::finish(m, err, out_dir / "manifest.json");
}

// ---------------------------------------------------------------------------
// compare-init
// ---------------------------------------------------------------------------

struct CompareInitOptions {
    std::string input_csv;
    std::string truth_csv;
    std::string coords_csv;
    std::string inits; // comma-separated initializer names; empty = all
    std::string config_path;
    ConfigOverrides overrides;
    std::size_t block_threshold = 11;
    std::string out_dir;
};

inline int cmd_compare_init(const CompareInitOptions& opt) {
    RunManifest m;
    m.command = "compare-init";
    m.started = now_iso8601();
    const fs::path out_dir = resolve_out_dir(opt.out_dir);
    fs::create_directories(out_dir);

    const auto err = detail::run_guarded([&] {
        const TrainConfig cfg = resolve_config(opt.config_path, opt.overrides);
        m.config = config_to_json(cfg);
        m.seed = cfg.seed;
        auto ds = ingest::load_csv(opt.input_csv);
        m.add_input(opt.input_csv);
        if (opt.truth_csv.empty())
            throw config_error("compare-init: ground truth file required (--truth)");
        ingest::load_truth(ds, opt.truth_csv);
        m.add_input(opt.truth_csv);
        init::SensorCoordinates coords;
        if (!opt.coords_csv.empty())
            coords = init::align_coordinates(ds, ingest::load_coordinates(opt.coords_csv));

        std::vector<init::InitializerKind> kinds;
        if (opt.inits.empty()) {
            for (auto method :
                 {init::InitializerMethod::TemporalNearest, init::InitializerMethod::WindowMean,
                  init::InitializerMethod::GlobalMean, init::InitializerMethod::SpatialTemporalCombo}) {
                init::InitializerKind k;
                k.method = method;
                kinds.push_back(k);
            }
        } else {
            std::string tok;
            std::stringstream ss(opt.inits);
            while (std::getline(ss, tok, ',')) {
                auto method = init::initializer_from_name(tok);
                if (!method) throw config_error("unknown initializer '" + tok + "'");
                init::InitializerKind k;
                k.method = *method;
                kinds.push_back(k);
            }
        }

        const auto rows = eval::compare_initializers(ds, kinds, cfg, coords, opt.block_threshold);
        nlohmann::json j = nlohmann::json::array();
        std::string csv = "initializer,init_mae,post_cascade_mae\n";
        for (const auto& row : rows) {
            j.push_back({{"initializer", init::initializer_name(row.kind.method)},
                         {"init_mae", row.init_mae},
                         {"post_cascade_mae", row.post_cascade_mae},
                         {"report", eval::report_to_json(row.report)}});
            csv += std::string(init::initializer_name(row.kind.method)) + "," +
                   format_g17(row.init_mae) + "," + format_g17(row.post_cascade_mae) + "\n";
        }
        const fs::path pj = out_dir / "compare_init.json", pc = out_dir / "compare_init.csv";
        {
            std::ofstream out(pj);
            if (!out) throw data_error("cannot write " + pj.string());
            out << j.dump(2) << "\n";
        }
        {
            std::ofstream out(pc);
            if (!out) throw data_error("cannot write " + pc.string());
            out << csv;
        }
        m.outputs.push_back(pj.string());
        m.outputs.push_back(pc.string());
    });
    return detail::finish(m, err, out_dir / "manifest.json");
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOptions {
    std::string data_csv;               // original dataset (mask/blocks come from it)
    std::string truth_csv;              // ground-truth sidecar
    std::vector<std::string> imputed;   // dense series, iteration order; last is final
    std::size_t block_threshold = 11;
    std::string out_dir;
};

inline int cmd_eval(const EvalOptions& opt) {
    RunManifest m;
    m.command = "eval";
    m.started = now_iso8601();
    const fs::path out_dir = resolve_out_dir(opt.out_dir);
    fs::create_directories(out_dir);

    const auto err = detail::run_guarded([&] {
        if (opt.imputed.empty()) throw config_error("eval: at least one --imputed series required");
        auto ds = ingest::load_csv(opt.data_csv);
        m.add_input(opt.data_csv);
        ingest::load_truth(ds, opt.truth_csv);
        m.add_input(opt.truth_csv);
        std::vector<std::vector<double>> trajectory;
        for (const auto& path : opt.imputed) {
            trajectory.push_back(detail::load_dense_aligned(ds, path));
            m.add_input(path);
        }
        const auto blocks = core::classify_blocks(ds, opt.block_threshold);
        const auto report = eval::score(trajectory, ds, blocks);
        const fs::path pj = out_dir / "report.json", pc = out_dir / "report.csv";
        eval::save_report(report, pj.string(), pc.string());
        m.outputs.push_back(pj.string());
        m.outputs.push_back(pc.string());
    });
    return detail::finish(m, err, out_dir / "manifest.json");
}

} // namespace gapfill::cli
