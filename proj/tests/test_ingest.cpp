#include <doctest.h>

#include <random>

#include "gapfill/ingest/csv.hpp"
#include "gapfill/ingest/simulate.hpp"
#include "gapfill/ingest/split.hpp"
#include "helpers.hpp"

using namespace gapfill;
using namespace gapfill::core;
using namespace gapfill::ingest;
using testutil::NA;

TEST_CASE("load_csv basics: NA cells, union alignment, duplicates") {
    testutil::TempDir tmp("csv");

    SUBCASE("NA cell becomes Missing") {
        testutil::write_file(tmp.file("a.csv"),
                             "sensor_id,timestamp,value\nA,0,1.5\nA,1,NA\nA,2,2.5\nB,0,3\nB,1,4\nB,2,5\n");
        auto ds = load_csv(tmp.file("a.csv"));
        CHECK(ds.num_sensors() == 2);
        CHECK(ds.num_timestamps() == 3);
        CHECK(ds.count_state(MaskState::Missing) == 1);
        CHECK_FALSE(ds.observed(1, 0));
        CHECK(ds.value(2, 0) == 2.5);
    }

    SUBCASE("ragged sensors align on the union of timestamps") {
        testutil::write_file(tmp.file("b.csv"),
                             "sensor_id,timestamp,value\nA,0,1\nA,1,2\nA,2,3\nB,1,4\nB,2,5\nB,3,6\n");
        auto ds = load_csv(tmp.file("b.csv"));
        CHECK(ds.num_timestamps() == 4);
        CHECK_FALSE(ds.observed(3, 0)); // A missing at hour 3
        CHECK_FALSE(ds.observed(0, 1)); // B missing at hour 0
        CHECK(ds.observed(1, 1));
    }

    SUBCASE("duplicate cell is a data error") {
        testutil::write_file(tmp.file("c.csv"),
                             "sensor_id,timestamp,value\nA,1,1\nA,1,2\n");
        CHECK_THROWS_AS(load_csv(tmp.file("c.csv")), data_error);
    }

    SUBCASE("malformed row reports its line number") {
        testutil::write_file(tmp.file("d.csv"), "sensor_id,timestamp,value\nA,0,1\nA,1,zap\n");
        try {
            load_csv(tmp.file("d.csv"));
            FAIL("expected data_error");
        } catch (const data_error& e) {
            CHECK(std::string(e.what()).find(":3:") != std::string::npos);
        }
    }

    SUBCASE("timestamp kinds must be uniform within a file") {
        testutil::write_file(tmp.file("e.csv"),
                             "sensor_id,timestamp,value\nA,0,1\nA,2014-05-04 14:00:00,2\n");
        CHECK_THROWS_AS(load_csv(tmp.file("e.csv")), data_error);
    }

    SUBCASE("ISO-8601 timestamps carry calendar metadata") {
        testutil::write_file(tmp.file("f.csv"),
                             "sensor_id,timestamp,value\nA,2014-05-04 14:00:00,1\nA,2014-06-04 14:00:00,2\n");
        auto ds = load_csv(tmp.file("f.csv"));
        REQUIRE(ds.has_calendar());
        CHECK(ds.calendar[0].month == 5);
        CHECK(ds.calendar[1].month == 6);
        CHECK(ds.ts_kind == TimestampKind::Iso8601);
    }
}

TEST_CASE("save/load round trip is bit-exact") {
    testutil::TempDir tmp("roundtrip");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e3, 1e3);

    std::vector<std::vector<double>> rows(17, std::vector<double>(3));
    for (auto& row : rows)
        for (auto& c : row) c = u(rng) * 1.0000001234;
    auto ds = testutil::grid({"s1", "s2", "s3"}, rows);
    // hold out a couple of entries so the sidecar path is exercised
    MissingSpec spec;
    spec.rate = 0.2;
    spec.seed = 9;
    auto held = simulate_missing(ds, spec);

    save_csv(held, tmp.file("data.csv"));
    save_truth(held, tmp.file("truth.csv"));
    auto back = load_csv(tmp.file("data.csv"));
    load_truth(back, tmp.file("truth.csv"));

    REQUIRE(back.num_cells() == held.num_cells());
    CHECK(back.sensor_ids == held.sensor_ids);
    CHECK(back.timestamps == held.timestamps);
    CHECK(back.mask == held.mask);
    for (std::size_t c = 0; c < held.num_cells(); ++c) {
        if (held.mask[c] == MaskState::Observed) CHECK(back.values[c] == held.values[c]);
    }
    CHECK(back.truth == held.truth);
}

TEST_CASE("simulate_missing: exact count, determinism, zero rate") {
    std::vector<std::vector<double>> rows(50, std::vector<double>(2, 1.0));
    auto ds = testutil::grid({"A", "B"}, rows);
    REQUIRE(ds.count_state(MaskState::Observed) == 100);

    MissingSpec spec;
    spec.rate = 0.2;
    spec.seed = 7;

    auto h1 = simulate_missing(ds, spec);
    CHECK(h1.count_state(MaskState::Holdout) == 20);
    CHECK(h1.count_state(MaskState::Observed) == 80);

    auto h2 = simulate_missing(ds, spec);
    CHECK(h1.mask == h2.mask);

    spec.seed = 8;
    auto h3 = simulate_missing(ds, spec);
    CHECK(h1.mask != h3.mask);

    spec.rate = 0.0;
    auto h0 = simulate_missing(ds, spec);
    CHECK(h0.mask == ds.mask);
    CHECK(h0.values == ds.values);

    spec.rate = 1.0;
    CHECK_THROWS_AS(simulate_missing(ds, spec), config_error);
}

TEST_CASE("simulate_missing only converts observed entries and keeps values") {
    std::vector<std::vector<double>> rows(40, std::vector<double>(2, 2.0));
    rows[5][0] = NA();
    auto ds = testutil::grid({"A", "B"}, rows);
    MissingSpec spec;
    spec.rate = 0.3;
    spec.seed = 1;
    auto held = simulate_missing(ds, spec);
    CHECK(held.mask[ds.cell(5, 0)] == MaskState::Missing); // untouched
    for (std::size_t c = 0; c < ds.num_cells(); ++c) {
        if (held.mask[c] == MaskState::Observed) CHECK(held.values[c] == ds.values[c]);
        if (held.mask[c] == MaskState::Holdout) {
            core::TruthAudit::Scope scope;
            CHECK(held.truth.value(c) == ds.values[c]);
        }
    }
}

TEST_CASE("block injection produces contiguous holdout runs") {
    std::vector<std::vector<double>> rows(200, std::vector<double>(1, 1.0));
    auto ds = testutil::grid({"A"}, rows);
    MissingSpec spec;
    spec.mechanism = MissingMechanism::BlockInjection;
    spec.rate = 0.2;
    spec.block_min = 5;
    spec.block_max = 10;
    spec.seed = 13;
    auto held = simulate_missing(ds, spec);
    CHECK(held.count_state(MaskState::Holdout) == 40);
    // at least one run of length >= block_min must exist
    std::size_t best_run = 0, run = 0;
    for (std::size_t t = 0; t < 200; ++t) {
        if (held.mask[ds.cell(t, 0)] == MaskState::Holdout)
            best_run = std::max(best_run, ++run);
        else
            run = 0;
    }
    CHECK(best_run >= spec.block_min);
}

TEST_CASE("holdout_position_copy mirrors source gaps into the target period") {
    std::vector<std::vector<double>> rows(20, std::vector<double>(1, 1.0));
    rows[4][0] = NA(); // source gap at offset 4
    rows[16][0] = NA(); // target already missing at offset 6
    for (std::size_t t = 0; t < 20; ++t)
        if (!std::isnan(rows[t][0])) rows[t][0] = static_cast<double>(t);
    auto ds = testutil::grid({"A"}, rows);

    SUBCASE("observed target entry becomes holdout") {
        auto held = holdout_position_copy(ds, {0, 10}, {10, 10});
        CHECK(held.mask[ds.cell(14, 0)] == MaskState::Holdout);
        core::TruthAudit::Scope scope;
        CHECK(held.truth.value(ds.cell(14, 0)) == 14.0);
    }
    SUBCASE("source without gaps leaves the target unchanged") {
        auto held = holdout_position_copy(ds, {5, 5}, {10, 5});
        CHECK(held.count_state(MaskState::Holdout) == 0);
    }
    SUBCASE("already-missing target entries stay missing") {
        std::vector<std::vector<double>> r2(20, std::vector<double>(1, 1.0));
        r2[6][0] = NA();  // source gap at offset 6
        r2[16][0] = NA(); // target position for that offset is missing too
        auto ds2 = testutil::grid({"A"}, r2);
        auto held = holdout_position_copy(ds2, {0, 10}, {10, 10});
        CHECK(held.mask[ds2.cell(16, 0)] == MaskState::Missing);
        CHECK(held.count_state(MaskState::Holdout) == 0);
    }
    SUBCASE("mismatched period lengths are a config error") {
        CHECK_THROWS_AS(holdout_position_copy(ds, {0, 10}, {10, 9}), config_error);
    }
}

TEST_CASE("split by calendar months") {
    testutil::TempDir tmp("split");
    std::string csv = "sensor_id,timestamp,value\n";
    // two sensors, daily samples across 1..12/2014 (first 4 days of each month)
    for (int month = 1; month <= 12; ++month)
        for (int day = 1; day <= 4; ++day) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "2014-%02d-%02d 00:00:00", month, day);
            csv += "A," + std::string(buf) + ",1.0\n";
            csv += "B," + std::string(buf) + ",2.0\n";
        }
    testutil::write_file(tmp.file("cal.csv"), csv);
    auto ds = load_csv(tmp.file("cal.csv"));

    SplitSpec spec;
    spec.seed = 5;
    auto r = split(ds, spec, 2);
    CHECK(r.test.num_timestamps() == 16);  // 4 test months x 4 days
    CHECK(r.train.num_timestamps() == 32); // 8 train months x 4 days
    for (std::size_t t = 0; t < r.test.num_timestamps(); ++t) {
        const int m = r.test.calendar[t].month;
        CHECK((m == 3 || m == 6 || m == 9 || m == 12));
    }
    // validation centers live in train months only
    for (const auto& e : r.validation) {
        const int m = ds.calendar[e.t].month;
        CHECK((m != 3 && m != 6 && m != 9 && m != 12));
    }
    // determinism
    auto r2 = split(ds, spec, 2);
    CHECK(r.validation.size() == r2.validation.size());
    for (std::size_t i = 0; i < r.validation.size(); ++i) CHECK(r.validation[i] == r2.validation[i]);
}

TEST_CASE("validation selection uses the floor rule") {
    std::vector<std::vector<double>> rows(1008, std::vector<double>(1, 1.0));
    auto ds = testutil::grid({"A"}, rows);
    // w=4: interior candidates are fully observed anchors; all 1008 centers are
    // observed, pads make edge anchors still valid (8 of 9 observed > 4.5)
    auto centers = select_validation_centers(ds, 4, 0.1, 3);
    CHECK(centers.size() == 100); // floor(0.1 * 1008)
}

TEST_CASE("fractional split covers datasets without calendar metadata") {
    std::vector<std::vector<double>> rows(120, std::vector<double>(1, 1.0));
    auto ds = testutil::grid({"A"}, rows);
    SplitSpec spec;
    auto r = split(ds, spec, 2);
    CHECK(r.test.num_timestamps() == 40); // 4/12 of 120
    CHECK(r.train.num_timestamps() == 80);
    // contiguous tail
    CHECK(r.test_timestamp_indices.front() == 80);
    CHECK(r.test_timestamp_indices.back() == 119);
}

TEST_CASE("split validates its spec") {
    std::vector<std::vector<double>> rows(24, std::vector<double>(1, 1.0));
    auto ds = testutil::grid({"A"}, rows);
    SplitSpec bad;
    bad.validation_fraction = 0.0;
    CHECK_THROWS_AS(split(ds, bad, 2), config_error);
    SplitSpec bad2;
    bad2.test_months = {13};
    CHECK_THROWS_AS(split(ds, bad2, 2), config_error);
}
