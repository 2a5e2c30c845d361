#include <doctest.h>

#include <algorithm>
#include <random>

#include "gapfill/core/anchor.hpp"
#include "gapfill/core/blocks.hpp"
#include "helpers.hpp"

using namespace gapfill;
using namespace gapfill::core;
using testutil::NA;

TEST_CASE("anchor extraction over a fully observed window") {
    auto ds = testutil::series({1, 2, 3, 4, 5, 6, 7});
    auto a = extract_anchor(ds, 0, 3, 3);
    CHECK(a.observed_count == 7);
    CHECK(a.center_observed);
    CHECK(is_valid_anchor(a));
    CHECK(a.left(0).value == 1.0);
    CHECK(a.right(2).value == 7.0);
    CHECK(a.center_slot().value == 4.0);
}

TEST_CASE("anchor validity is strictly more than half") {
    // 4 of 7 observed is valid, 3 of 7 is not
    auto ds4 = testutil::series({1, NA(), 3, 4, NA(), 6, NA()});
    auto a4 = extract_anchor(ds4, 0, 3, 3);
    CHECK(a4.observed_count == 4);
    CHECK(is_valid_anchor(a4));

    auto ds3 = testutil::series({1, NA(), NA(), 4, NA(), 6, NA()});
    auto a3 = extract_anchor(ds3, 0, 3, 3);
    CHECK(a3.observed_count == 3);
    CHECK_FALSE(is_valid_anchor(a3));
}

TEST_CASE("boundary windows are padded with missing slots") {
    auto ds = testutil::series({10, 20, 30});
    auto a = extract_anchor(ds, 0, 0, 3);
    CHECK(a.slots.size() == 7);
    CHECK(a.observed_count == 3); // three real entries; four pads
    CHECK_FALSE(a.left(0).observed);
    CHECK(a.times[0] == doctest::Approx(-3.0)); // extrapolated at the median step
    CHECK_FALSE(is_valid_anchor(a));            // 3*2 = 6 < 7
}

TEST_CASE("holdout entries count as unobserved for anchors") {
    auto ds = testutil::series({1, 2, 3});
    ds.truth.set(ds.cell(1, 0), ds.value(1, 0));
    ds.values[ds.cell(1, 0)] = NA();
    ds.mask[ds.cell(1, 0)] = MaskState::Holdout;
    auto a = extract_anchor(ds, 0, 1, 1);
    CHECK_FALSE(a.center_observed);
    CHECK(a.observed_count == 2);
}

TEST_CASE("anchor range and window checks") {
    auto ds = testutil::series({1, 2, 3});
    CHECK_THROWS_AS(extract_anchor(ds, 1, 0, 1), std::out_of_range);
    CHECK_THROWS_AS(extract_anchor(ds, 0, 3, 1), std::out_of_range);
    CHECK_THROWS_AS(extract_anchor(ds, 0, 0, 0), config_error);
}

TEST_CASE("every anchor of a fully observed series is valid") {
    std::vector<double> v(40);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    auto ds = testutil::series(v);
    for (std::size_t t = 0; t < v.size(); ++t) {
        auto a = extract_anchor(ds, 0, t, 3);
        // near boundaries pads reduce the count; interior anchors are full
        if (t >= 3 && t + 3 < v.size()) {
            CHECK(a.observed_count == 7);
            CHECK(is_valid_anchor(a));
        }
    }
}

TEST_CASE("temporal blocks honour the run-length threshold") {
    auto make_run = [&](std::size_t len) {
        std::vector<double> v(30, 1.0);
        for (std::size_t i = 5; i < 5 + len; ++i) v[i] = NA();
        return testutil::series(v);
    };
    for (std::size_t len : {10u, 11u, 12u}) {
        auto ds = make_run(len);
        auto b = classify_blocks(ds, 11);
        if (len >= 11) {
            REQUIRE(b.temporal[0].size() == 1);
            CHECK(b.temporal[0][0].start == 5);
            CHECK(b.temporal[0][0].length == len);
            CHECK(b.in_temporal(0, 5));
            CHECK(b.in_temporal(0, 5 + len - 1));
            CHECK_FALSE(b.in_temporal(0, 4));
            CHECK_FALSE(b.in_temporal(0, 5 + len));
        } else {
            CHECK(b.temporal[0].empty());
        }
    }
}

TEST_CASE("spatial blocks are timestamps with no observation at all") {
    auto ds = testutil::grid({"A", "B", "C"},
                             {{1, 2, 3}, {NA(), NA(), NA()}, {4, NA(), 6}, {7, 8, 9}});
    auto b = classify_blocks(ds, 11);
    REQUIRE(b.spatial.size() == 1);
    CHECK(b.spatial[0] == 1);
    CHECK(b.in_spatial(1));
    CHECK_FALSE(b.in_spatial(2));
}

TEST_CASE("scenario membership partitions entries") {
    // sensor A has an isolated gap and a 12-run; sensor B stays observed so
    // no timestamp is a spatial block
    std::vector<std::vector<double>> rows(30, std::vector<double>(2, 1.0));
    rows[2][0] = NA();
    for (std::size_t i = 10; i < 22; ++i) rows[i][0] = NA();
    auto ds = testutil::grid({"A", "B"}, rows);
    auto b = classify_blocks(ds, 11);
    CHECK(b.spatial.empty());
    CHECK(scenario_membership(ds, b, 0, 2) == Scenario::GeneralMissing);
    CHECK(scenario_membership(ds, b, 0, 15) == Scenario::OverallOnly);
    CHECK(scenario_membership(ds, b, 0, 0) == Scenario::NotMissing);
}

TEST_CASE("general missing is a subset of all missing entries") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> rows(40, std::vector<double>(3, 1.0));
        std::uniform_real_distribution<double> u(0, 1);
        for (auto& row : rows)
            for (auto& cell : row)
                if (u(rng) < 0.4) cell = NA();
        auto ds = testutil::grid({"A", "B", "C"}, rows);
        auto b = classify_blocks(ds, 5);
        std::size_t missing = 0, general = 0, overall_only = 0;
        for (std::size_t s = 0; s < 3; ++s) {
            for (std::size_t t = 0; t < 40; ++t) {
                auto sc = scenario_membership(ds, b, s, t);
                if (!ds.observed(t, s)) {
                    ++missing;
                    CHECK(sc != Scenario::NotMissing);
                    if (sc == Scenario::GeneralMissing) ++general;
                    if (sc == Scenario::OverallOnly) ++overall_only;
                } else {
                    CHECK(sc == Scenario::NotMissing);
                }
            }
        }
        CHECK(general + overall_only == missing);
    }
}

TEST_CASE("classify_blocks is idempotent and sensor-order equivariant") {
    std::mt19937_64 rng(11);
    std::vector<std::vector<double>> rows(60, std::vector<double>(3, 1.0));
    std::uniform_real_distribution<double> u(0, 1);
    for (auto& row : rows)
        for (auto& cell : row)
            if (u(rng) < 0.5) cell = NA();
    auto ds = testutil::grid({"A", "B", "C"}, rows);

    auto b1 = classify_blocks(ds, 4);
    auto b2 = classify_blocks(ds, 4);
    CHECK(b1.spatial == b2.spatial);

    // permute sensor columns: spatial blocks fixed, temporal runs permuted
    std::vector<std::vector<double>> prows(60, std::vector<double>(3));
    const std::size_t perm[3] = {2, 0, 1};
    for (std::size_t t = 0; t < 60; ++t)
        for (std::size_t s = 0; s < 3; ++s) prows[t][s] = rows[t][perm[s]];
    auto pds = testutil::grid({"C", "A", "B"}, prows);
    auto pb = classify_blocks(pds, 4);
    CHECK(pb.spatial == b1.spatial);
    for (std::size_t s = 0; s < 3; ++s) {
        REQUIRE(pb.temporal[s].size() == b1.temporal[perm[s]].size());
        for (std::size_t i = 0; i < pb.temporal[s].size(); ++i) {
            CHECK(pb.temporal[s][i].start == b1.temporal[perm[s]][i].start);
            CHECK(pb.temporal[s][i].length == b1.temporal[perm[s]][i].length);
        }
    }
}

TEST_CASE("ground-truth audit counts unsanctioned reads") {
    auto ds = testutil::series({1, 2, 3});
    ds.truth.set(0, 42.0);
    TruthAudit::reset();
    TruthAudit::arm();
    (void)ds.truth.value(0); // unsanctioned
    CHECK(TruthAudit::violations() == 1);
    {
        TruthAudit::Scope scope;
        (void)ds.truth.value(0); // sanctioned
    }
    CHECK(TruthAudit::violations() == 1);
    TruthAudit::disarm();
    TruthAudit::reset();
}
