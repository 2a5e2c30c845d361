#include <doctest.h>

#include <algorithm>
#include <random>

#include "gapfill/imputer/cascade.hpp"
#include "gapfill/ingest/simulate.hpp"
#include "gapfill/synthetic.hpp"
#include "helpers.hpp"

using namespace gapfill;
using namespace gapfill::core;
using namespace gapfill::imputer;
using testutil::NA;

namespace {

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.w = 3;
    cfg.hidden = 6;
    cfg.batch_size = 16;
    cfg.max_epochs = 2;
    cfg.patience = 1;
    cfg.iter_num = 1;
    cfg.seed = 11;
    cfg.threads = 1;
    return cfg;
}

SensorDataset noisy_wave(std::size_t steps, std::uint64_t seed, double missing = 0.0) {
    synth::SyntheticSpec spec;
    spec.sensors = 2;
    spec.steps = steps;
    spec.seed = seed;
    auto ds = synth::generate(spec);
    if (missing > 0.0) {
        ingest::MissingSpec mspec;
        mspec.rate = missing;
        mspec.seed = seed + 1;
        ds = ingest::simulate_missing(ds, mspec);
    }
    return ds;
}

} // namespace

TEST_CASE("build_training_pairs: fully observed series yields a pair per center") {
    auto ds = noisy_wave(60, 1);
    auto cfg = tiny_config();
    Normalizer norm = Normalizer::fit(ds, cfg.normalization);
    auto dense = init::initialize(ds, cfg.initializer);
    auto pairs = build_training_pairs(ds, dense, norm, cfg, {});
    // every center is valid: even edge anchors keep w+1 of 2w+1 observed
    CHECK(pairs.samples.size() == ds.num_cells());
    CHECK(pairs.samples[0].fwd_seq.size() == 3);
    CHECK(pairs.samples[0].bwd_seq.size() == 3);
}

TEST_CASE("build_training_pairs skips missing centers and invalid anchors") {
    std::vector<double> v(20, 1.5);
    v[10] = NA(); // missing center
    // a heavily missing neighbourhood makes t=3 invalid: 3 of 7 observed
    v[1] = v[2] = v[4] = v[6] = NA();
    auto ds = testutil::series(v);
    auto cfg = tiny_config();
    Normalizer norm = Normalizer::fit(ds, cfg.normalization);
    auto dense = init::initialize(ds, cfg.initializer);
    auto pairs = build_training_pairs(ds, dense, norm, cfg, {});
    for (const auto& c : pairs.centers) {
        CHECK(ds.observed(c.t, c.sensor));
        CHECK(c.t != 10);
        CHECK(c.t != 3);
    }
    auto anchor = extract_anchor(ds, 0, 3, 3);
    CHECK(anchor.observed_count == 3);
    CHECK_FALSE(is_valid_anchor(anchor));
}

TEST_CASE("build_training_pairs excludes validation centers") {
    auto ds = noisy_wave(40, 2);
    auto cfg = tiny_config();
    Normalizer norm = Normalizer::fit(ds, cfg.normalization);
    auto dense = init::initialize(ds, cfg.initializer);
    std::vector<ingest::EntryRef> validation = {{0, 5}, {1, 7}};
    auto pairs = build_training_pairs(ds, dense, norm, cfg, validation);
    for (const auto& c : pairs.centers) {
        const bool is_val = std::any_of(validation.begin(), validation.end(),
                                        [&](const ingest::EntryRef& e) { return e == c; });
        CHECK_FALSE(is_val);
    }
    CHECK(pairs.samples.size() == ds.num_cells() - 2);
}

TEST_CASE("holdout centers never become labels") {
    auto ds = noisy_wave(40, 3, 0.2);
    auto cfg = tiny_config();
    Normalizer norm = Normalizer::fit(ds, cfg.normalization);
    auto dense = init::initialize(ds, cfg.initializer);
    auto pairs = build_training_pairs(ds, dense, norm, cfg, {});
    for (const auto& c : pairs.centers) CHECK(ds.observed(c.t, c.sensor));
}

TEST_CASE("early stopper semantics") {
    SUBCASE("patience 0 stops at the first non-improving epoch") {
        EarlyStopper st(0);
        CHECK_FALSE(st.observe(1.0)); // improvement
        CHECK_FALSE(st.observe(0.8)); // improvement
        CHECK(st.observe(0.85));      // first non-improvement -> stop
    }
    SUBCASE("patience 2 tolerates two bad epochs") {
        EarlyStopper st(2);
        CHECK_FALSE(st.observe(1.0));
        CHECK_FALSE(st.observe(1.1));
        CHECK_FALSE(st.observe(1.2));
        CHECK(st.observe(1.3));
    }
    SUBCASE("equal value is not an improvement") {
        EarlyStopper st(0);
        CHECK_FALSE(st.observe(1.0));
        CHECK(st.observe(1.0));
    }
}

TEST_CASE("training a constant series starts at zero loss") {
    std::vector<double> v(50, 7.5);
    auto ds = testutil::series(v);
    auto cfg = tiny_config();
    Normalizer norm = Normalizer::fit(ds, cfg.normalization);
    CHECK(norm.stdev[0] == 1.0); // zero variance degrades to unit scale
    auto dense = init::initialize(ds, cfg.initializer);
    auto pairs = build_training_pairs(ds, dense, norm, cfg, {});
    auto model = nn::init_params({1, cfg.hidden}, cfg.cell_kind, cfg.seed);
    auto opt = nn::NadamState::create(model, cfg.optimizer);
    const double mae0 = train_epoch(model, opt, pairs.samples, cfg, 77);
    CHECK(mae0 == 0.0); // all-zero normalized inputs and targets, zero biases
}

TEST_CASE("train_epoch is deterministic given the seed") {
    auto ds = noisy_wave(60, 4, 0.1);
    auto cfg = tiny_config();
    Normalizer norm = Normalizer::fit(ds, cfg.normalization);
    auto dense = init::initialize(ds, cfg.initializer);
    auto pairs = build_training_pairs(ds, dense, norm, cfg, {});

    auto m1 = nn::init_params({1, cfg.hidden}, cfg.cell_kind, 5);
    auto m2 = m1;
    auto o1 = nn::NadamState::create(m1, cfg.optimizer);
    auto o2 = nn::NadamState::create(m2, cfg.optimizer);
    const double a = train_epoch(m1, o1, pairs.samples, cfg, 99);
    const double b = train_epoch(m2, o2, pairs.samples, cfg, 99);
    CHECK(a == b);
    auto r1 = nn::trainable_params(m1), r2 = nn::trainable_params(m2);
    for (std::size_t k = 0; k < r1.size(); ++k) CHECK(r1[k].mat->a == r2[k].mat->a);
}

TEST_CASE("fit returns the best-validation checkpoint") {
    auto ds = noisy_wave(120, 5, 0.15);
    auto cfg = tiny_config();
    cfg.max_epochs = 6;
    cfg.patience = 5;
    Normalizer norm = Normalizer::fit(ds, cfg.normalization);
    auto dense = init::initialize(ds, cfg.initializer);
    auto validation = ingest::select_validation_centers(ds, cfg.w, 0.1, 42);
    auto train = build_training_pairs(ds, dense, norm, cfg, validation);
    auto val = build_pairs_at(ds, dense, norm, cfg, validation);

    auto model = nn::init_params({1, cfg.hidden}, cfg.cell_kind, 6);
    auto fr = fit(model, train.samples, val.samples, cfg, 7);
    REQUIRE(!fr.epoch_validation_mae.empty());
    const double min_val =
        *std::min_element(fr.epoch_validation_mae.begin(), fr.epoch_validation_mae.end());
    CHECK(fr.best_validation_mae == doctest::Approx(min_val));

    // the returned model reproduces its recorded validation score
    nn::Workspace ws;
    CHECK(evaluate_pairs(fr.best_model, val.samples, ws) == doctest::Approx(fr.best_validation_mae));

    // reproducibility
    auto fr2 = fit(model, train.samples, val.samples, cfg, 7);
    CHECK(fr.epoch_train_mae == fr2.epoch_train_mae);
    CHECK(fr.epoch_validation_mae == fr2.epoch_validation_mae);
}

TEST_CASE("fit with no pairs explains the failure") {
    auto cfg = tiny_config();
    std::vector<nn::ContextSample> empty;
    auto model = nn::init_params({1, cfg.hidden}, cfg.cell_kind, 1);
    CHECK_THROWS_WITH_AS(fit(model, empty, empty, cfg, 1),
                         doctest::Contains("larger window"), config_error);
}

TEST_CASE("predict_missing") {
    auto cfg = tiny_config();
    std::vector<double> v(40);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.3 * static_cast<double>(i));
    v[20] = NA();
    auto ds = testutil::series(v);
    Normalizer norm = Normalizer::fit(ds, cfg.normalization);
    auto dense = init::initialize(ds, cfg.initializer);
    auto model = nn::init_params({1, cfg.hidden}, cfg.cell_kind, 8);
    auto index = build_missing_index(ds);
    REQUIRE(index.size() == 1);

    SUBCASE("no missing entries leaves the series untouched") {
        auto updated = predict_missing(model, ds, dense, {}, norm, cfg);
        CHECK(updated == dense);
    }
    SUBCASE("observed entries are bitwise unchanged") {
        auto updated = predict_missing(model, ds, dense, index, norm, cfg);
        for (std::size_t t = 0; t < ds.num_timestamps(); ++t)
            if (ds.observed(t, 0)) CHECK(updated[ds.cell(t, 0)] == ds.value(t, 0));
        CHECK(updated[ds.cell(20, 0)] != dense[ds.cell(20, 0)]);
    }
    SUBCASE("the estimate ignores the current value at the center by default") {
        auto updated1 = predict_missing(model, ds, dense, index, norm, cfg);
        auto perturbed = dense;
        perturbed[ds.cell(20, 0)] += 123.0; // only the isolated gap itself changes
        auto updated2 = predict_missing(model, ds, perturbed, index, norm, cfg);
        CHECK(updated1[ds.cell(20, 0)] == updated2[ds.cell(20, 0)]);
    }
    SUBCASE("with include_center_input the current estimate feeds the prediction") {
        auto cfg_center = cfg;
        cfg_center.include_center_input = true;
        auto updated1 = predict_missing(model, ds, dense, index, norm, cfg_center);
        auto perturbed = dense;
        perturbed[ds.cell(20, 0)] += 123.0;
        auto updated2 = predict_missing(model, ds, perturbed, index, norm, cfg_center);
        CHECK(updated1[ds.cell(20, 0)] != updated2[ds.cell(20, 0)]);
    }
}

TEST_CASE("predict_missing covers whole blocks and is order-independent") {
    auto cfg = tiny_config();
    std::vector<double> v(60);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(0.2 * static_cast<double>(i));
    for (std::size_t i = 25; i < 36; ++i) v[i] = NA(); // an 11-run
    auto ds = testutil::series(v);
    Normalizer norm = Normalizer::fit(ds, cfg.normalization);
    auto dense = init::initialize(ds, cfg.initializer);
    for (std::size_t i = 25; i < 36; ++i) dense[ds.cell(i, 0)] = 9999.0; // sentinel
    auto model = nn::init_params({1, cfg.hidden}, cfg.cell_kind, 9);
    auto index = build_missing_index(ds);
    REQUIRE(index.size() == 11);

    auto updated = predict_missing(model, ds, dense, index, norm, cfg);
    for (std::size_t i = 25; i < 36; ++i) {
        CHECK(updated[ds.cell(i, 0)] != 9999.0); // every position re-estimated
        CHECK(std::isfinite(updated[ds.cell(i, 0)]));
    }

    auto shuffled = index;
    std::mt19937_64 rng(4);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto updated2 = predict_missing(model, ds, dense, shuffled, norm, cfg);
    CHECK(updated == updated2); // synchronous update: order cannot matter
}

TEST_CASE("run_cascade structure and invariants") {
    auto ds = noisy_wave(80, 6, 0.2);
    auto cfg = tiny_config();
    cfg.iter_num = 2;

    auto run = run_cascade(ds, cfg);
    CHECK(run.series.size() == 3); // T_0, T_1, T_2
    CHECK(run.validation_mae.size() == 2);
    CHECK(run.checkpoints.size() == 2);
    CHECK(run.missing_index.size() == ds.count_state(MaskState::Holdout));

    // observed entries never drift, in any round
    for (const auto& series : run.series)
        for (std::size_t t = 0; t < ds.num_timestamps(); ++t)
            for (std::size_t s = 0; s < ds.num_sensors(); ++s)
                if (ds.observed(t, s)) CHECK(series[ds.cell(t, s)] == ds.value(t, s));

    // determinism end to end
    auto run2 = run_cascade(ds, cfg);
    for (std::size_t i = 0; i < run.series.size(); ++i) CHECK(run.series[i] == run2.series[i]);
    CHECK(run.validation_mae == run2.validation_mae);
}

TEST_CASE("iter_num=1 does exactly one fit and one predict") {
    auto ds = noisy_wave(60, 7, 0.15);
    auto cfg = tiny_config();
    cfg.iter_num = 1;
    auto run = run_cascade(ds, cfg);
    CHECK(run.series.size() == 2);
    CHECK(run.validation_mae.size() == 1);
}

TEST_CASE("separate mode trains per sensor and fills everything") {
    auto ds = noisy_wave(70, 8, 0.2);
    auto cfg = tiny_config();
    cfg.mode = TrainMode::Separate;
    auto run = run_cascade(ds, cfg);
    for (const auto& e : run.missing_index)
        CHECK(std::isfinite(run.series.back()[ds.cell(e.t, e.sensor)]));
    // observed intact
    for (std::size_t t = 0; t < ds.num_timestamps(); ++t)
        for (std::size_t s = 0; s < ds.num_sensors(); ++s)
            if (ds.observed(t, s)) CHECK(run.series.back()[ds.cell(t, s)] == ds.value(t, s));
}

TEST_CASE("warm start carries weights while retrain starts fresh") {
    auto ds = noisy_wave(60, 9, 0.15);
    auto cfg = tiny_config();
    cfg.iter_num = 2;
    cfg.warm_start = true;
    auto warm = run_cascade(ds, cfg);
    cfg.warm_start = false;
    auto cold = run_cascade(ds, cfg);
    // same T_0, different training trajectories afterwards
    CHECK(warm.series[0] == cold.series[0]);
    CHECK(warm.series[2] != cold.series[2]);
}

TEST_CASE("phased cell runs the full cascade on irregular timestamps") {
    // irregular sampling: cumulative strictly-increasing real-valued gaps
    const std::size_t T = 90;
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> gap(0.3, 2.7);
    std::vector<double> ts(T);
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        acc += gap(rng);
        ts[t] = acc;
    }
    std::vector<std::vector<double>> rows(T, std::vector<double>(1));
    std::uniform_real_distribution<double> u(0, 1);
    for (std::size_t t = 0; t < T; ++t)
        rows[t][0] = 20.0 + 5.0 * std::sin(0.4 * ts[t]);
    auto ds = core::make_dataset({"A"}, ts, rows);
    ingest::MissingSpec mspec;
    mspec.rate = 0.15;
    mspec.seed = 56;
    auto held = ingest::simulate_missing(ds, mspec);

    auto cfg = tiny_config();
    cfg.cell_kind = nn::CellKind::Phased;
    cfg.iter_num = 2;
    auto run = run_cascade(held, cfg);
    CHECK(run.series.size() == 3);
    for (const auto& e : run.missing_index)
        CHECK(std::isfinite(run.series.back()[held.cell(e.t, e.sensor)]));
    // deterministic too
    auto run2 = run_cascade(held, cfg);
    CHECK(run.series.back() == run2.series.back());
}
