// gapfill — missing-value recovery for multi-sensor time series.
//
// Subcommands: gen, simulate, run, sweep, compare-init, eval.
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric error.

#include <CLI11.hpp>

#include "gapfill/cli/commands.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    bool deterministic = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file (flags override file values)");
    cmd->add_option("--out", f.out_dir, "output directory (default $GAPFILL_OUT_DIR or .)");
    cmd->add_flag("--deterministic", f.deterministic,
                  "single-threaded fixed-order execution for byte-identical reruns");
    cmd->add_option("--seed", f.seed, "master random seed")->each([&](const std::string&) {
        f.seed_set = true;
    });
}

void apply_common(const CommonFlags& f, gapfill::cli::ConfigOverrides& ov) {
    if (f.seed_set) ov.seed = f.seed;
    if (f.deterministic) ov.deterministic = true;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"missing-value recovery engine for multi-sensor time series"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic multi-sensor fixture");
    gapfill::cli::GenOptions gen_opt;
    CommonFlags gen_common;
    gen->add_option("--sensors", gen_opt.spec.sensors, "number of sensors");
    gen->add_option("--steps", gen_opt.spec.steps, "number of hourly steps");
    gen->add_option("--noise", gen_opt.spec.noise_sigma, "gaussian noise sigma");
    gen->add_option("--amp-jitter", gen_opt.spec.amp_jitter, "per-sensor amplitude jitter");
    gen->add_option("--phase-jitter", gen_opt.spec.phase_jitter, "per-sensor phase jitter (rad)");
    gen->add_option("--offset", gen_opt.spec.offset, "series offset");
    gen->add_option("--out-csv", gen_opt.out_csv, "output CSV path");
    add_common(gen, gen_common);

    // simulate
    auto* sim = app.add_subcommand("simulate", "hold out entries as imputation ground truth");
    gapfill::cli::SimulateOptions sim_opt;
    CommonFlags sim_common;
    sim->add_option("--input", sim_opt.input_csv, "input dataset CSV")->required();
    sim->add_option("--mechanism", sim_opt.mechanism,
                    "random-rate | fraction20 | block | position-copy");
    sim->add_option("--rate", sim_opt.rate, "holdout rate in [0,1)");
    sim->add_option("--block-min", sim_opt.block_min, "min injected block length");
    sim->add_option("--block-max", sim_opt.block_max, "max injected block length");
    sim->add_option("--source", sim_opt.source_month, "source month YYYY-MM (position-copy)");
    sim->add_option("--target", sim_opt.target_month, "target month YYYY-MM (position-copy)");
    sim->add_option("--out-csv", sim_opt.out_csv, "held-out dataset CSV path");
    sim->add_option("--out-truth", sim_opt.out_truth, "ground-truth sidecar path");
    add_common(sim, sim_common);

    // run
    auto* run = app.add_subcommand("run", "initialize, train and iteratively refine");
    gapfill::cli::RunOptions run_opt;
    CommonFlags run_common;
    run->add_option("--input", run_opt.input_csv, "input dataset CSV")->required();
    run->add_option("--truth", run_opt.truth_csv, "ground-truth sidecar (enables scoring)");
    run->add_option("--coords", run_opt.coords_csv, "sensor coordinates CSV");
    run->add_option("--iters", run_opt.overrides.iter_num, "cascade iterations");
    run->add_option("--cell", run_opt.overrides.cell_kind, "standard | phased");
    run->add_option("--mode", run_opt.overrides.mode, "mixed | separate");
    run->add_option("--w", run_opt.overrides.w, "half-window size");
    run->add_option("--hidden", run_opt.overrides.hidden, "hidden units per direction");
    run->add_option("--epochs", run_opt.overrides.max_epochs, "max training epochs per round");
    run->add_option("--patience", run_opt.overrides.patience, "early-stopping patience");
    run->add_option("--batch", run_opt.overrides.batch_size, "minibatch size");
    run->add_option("--init", run_opt.overrides.initializer,
                    "temporal-nearest | window-mean | global-mean | spatial-temporal");
    run->add_option("--threads", run_opt.overrides.threads, "worker threads (0 = auto)");
    run->add_option("--block-threshold", run_opt.block_threshold,
                    "temporal block run-length threshold");
    add_common(run, run_common);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "evaluate recovery across missing rates");
    gapfill::cli::SweepOptions sweep_opt;
    CommonFlags sweep_common;
    sweep->add_option("--input", sweep_opt.input_csv, "input dataset CSV")->required();
    sweep->add_option("--rates", sweep_opt.rates, "comma-separated rates (default 0.1..0.6)");
    sweep->add_option("--iters", sweep_opt.overrides.iter_num, "cascade iterations");
    sweep->add_option("--cell", sweep_opt.overrides.cell_kind, "standard | phased");
    sweep->add_option("--mode", sweep_opt.overrides.mode, "mixed | separate");
    sweep->add_option("--w", sweep_opt.overrides.w, "half-window size");
    sweep->add_option("--hidden", sweep_opt.overrides.hidden, "hidden units per direction");
    sweep->add_option("--epochs", sweep_opt.overrides.max_epochs, "max training epochs per round");
    sweep->add_option("--threads", sweep_opt.overrides.threads, "worker threads (0 = auto)");
    add_common(sweep, sweep_common);

    // compare-init
    auto* cmp = app.add_subcommand("compare-init", "score initializers before/after the cascade");
    gapfill::cli::CompareInitOptions cmp_opt;
    CommonFlags cmp_common;
    cmp->add_option("--input", cmp_opt.input_csv, "input dataset CSV")->required();
    cmp->add_option("--truth", cmp_opt.truth_csv, "ground-truth sidecar")->required();
    cmp->add_option("--coords", cmp_opt.coords_csv, "sensor coordinates CSV");
    cmp->add_option("--inits", cmp_opt.inits, "comma-separated initializer names (default all)");
    cmp->add_option("--iters", cmp_opt.overrides.iter_num, "cascade iterations");
    cmp->add_option("--w", cmp_opt.overrides.w, "half-window size");
    cmp->add_option("--hidden", cmp_opt.overrides.hidden, "hidden units per direction");
    cmp->add_option("--epochs", cmp_opt.overrides.max_epochs, "max training epochs per round");
    cmp->add_option("--threads", cmp_opt.overrides.threads, "worker threads (0 = auto)");
    add_common(cmp, cmp_common);

    // eval
    auto* ev = app.add_subcommand("eval", "score imputed series against ground truth");
    gapfill::cli::EvalOptions ev_opt;
    CommonFlags ev_common;
    ev->add_option("--data", ev_opt.data_csv, "original dataset CSV")->required();
    ev->add_option("--truth", ev_opt.truth_csv, "ground-truth sidecar")->required();
    ev->add_option("--imputed", ev_opt.imputed, "dense series CSVs in iteration order")->required();
    ev->add_option("--block-threshold", ev_opt.block_threshold,
                   "temporal block run-length threshold");
    add_common(ev, ev_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : gapfill::cli::kExitConfig;
    }

    if (gen->parsed()) {
        if (gen_common.seed_set) gen_opt.spec.seed = gen_common.seed;
        gen_opt.out_dir = gen_common.out_dir;
        return gapfill::cli::cmd_gen(gen_opt);
    }
    if (sim->parsed()) {
        if (sim_common.seed_set) sim_opt.seed = sim_common.seed;
        sim_opt.out_dir = sim_common.out_dir;
        return gapfill::cli::cmd_simulate(sim_opt);
    }
    if (run->parsed()) {
        apply_common(run_common, run_opt.overrides);
        run_opt.config_path = run_common.config_path;
        run_opt.out_dir = run_common.out_dir;
        return gapfill::cli::cmd_run(run_opt);
    }
    if (sweep->parsed()) {
        apply_common(sweep_common, sweep_opt.overrides);
        sweep_opt.config_path = sweep_common.config_path;
        sweep_opt.out_dir = sweep_common.out_dir;
        return gapfill::cli::cmd_sweep(sweep_opt);
    }
    if (cmp->parsed()) {
        apply_common(cmp_common, cmp_opt.overrides);
        cmp_opt.config_path = cmp_common.config_path;
        cmp_opt.out_dir = cmp_common.out_dir;
        return gapfill::cli::cmd_compare_init(cmp_opt);
    }
    if (ev->parsed()) {
        ev_opt.out_dir = ev_common.out_dir;
        return gapfill::cli::cmd_eval(ev_opt);
    }
    return gapfill::cli::kExitConfig;
}
