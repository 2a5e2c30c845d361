#include <doctest.h>

#include "gradcheck_util.hpp"

using namespace gapfill;
using namespace gapfill::nn;

TEST_CASE("analytic gradients match finite differences (standard cell)") {
    for (std::uint64_t point = 0; point < 3; ++point) {
        auto model = init_params({1, 4}, CellKind::Standard, 50 + point);
        auto batch = testutil::random_batch(8, 3, 150 + point);
        testutil::enforce_residual_margin(model, batch, 1e-2);
        auto res = testutil::gradient_check(model, batch, 0.0, 0);
        CHECK(res.min_abs_residual > 1e-3);
        CHECK(res.checked > 500);
        INFO("worst parameter: ", res.worst_param);
        CHECK(res.max_rel_error < 1e-4);
    }
}

TEST_CASE("analytic gradients match finite differences (phased cell)") {
    for (std::uint64_t point = 0; point < 2; ++point) {
        auto model = init_params({1, 4}, CellKind::Phased, 60 + point, 8.0);
        auto batch = testutil::random_batch(8, 3, 160 + point);
        testutil::enforce_residual_margin(model, batch, 1e-2);
        auto res = testutil::gradient_check(model, batch, 0.0, 0);
        CHECK(res.min_abs_residual > 1e-3);
        INFO("worst parameter: ", res.worst_param);
        CHECK(res.max_rel_error < 1e-4);
    }
}

TEST_CASE("gradients stay correct under a fixed dropout mask") {
    auto model = init_params({1, 4}, CellKind::Standard, 70);
    auto batch = testutil::random_batch(8, 3, 170);
    testutil::enforce_residual_margin(model, batch, 5e-2);
    auto res = testutil::gradient_check(model, batch, 0.3, 42);
    INFO("worst parameter: ", res.worst_param);
    CHECK(res.max_rel_error < 1e-4);
}

TEST_CASE("gradients flow through the center input when enabled") {
    auto model = init_params({1, 4}, CellKind::Standard, 71);
    auto batch = testutil::random_batch(8, 3, 171, /*with_center=*/true);
    testutil::enforce_residual_margin(model, batch, 1e-2);
    auto res = testutil::gradient_check(model, batch, 0.0, 0);
    INFO("worst parameter: ", res.worst_param);
    CHECK(res.max_rel_error < 1e-4);
}

TEST_CASE("duplicating every sample leaves the mean-loss gradient unchanged") {
    auto model = init_params({1, 3}, CellKind::Standard, 80);
    auto batch = testutil::random_batch(6, 2, 180);
    testutil::enforce_residual_margin(model, batch, 1e-2);

    ModelParams g1 = zeros_like(model), g2 = zeros_like(model);
    const double l1 = batch_backward(model, batch, 0.0, 0, g1, 1);

    auto doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());
    const double l2 = batch_backward(model, doubled, 0.0, 0, g2, 1);

    CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
    auto r1 = trainable_params(g1), r2 = trainable_params(g2);
    for (std::size_t k = 0; k < r1.size(); ++k)
        for (std::size_t i = 0; i < r1[k].mat->size(); ++i)
            CHECK(r1[k].mat->a[i] == doctest::Approx(r2[k].mat->a[i]).epsilon(1e-12));
}

TEST_CASE("zero model with zero targets sits exactly on the kink") {
    auto model = init_params({1, 4}, CellKind::Standard, 90);
    model = zeros_like(model);
    auto batch = testutil::random_batch(4, 3, 190);
    for (auto& s : batch) s.target = 0.0; // prediction is 0 too -> residual 0
    ModelParams grads = zeros_like(model);
    const double loss = batch_backward(model, batch, 0.0, 0, grads, 1);
    CHECK(loss == 0.0);
    CHECK(grads.head_b(0, 0) == 0.0); // subgradient at the kink is defined as 0
    for (const auto& ref : trainable_params(grads))
        for (double v : ref.mat->a) CHECK(v == 0.0);
}

TEST_CASE("threaded batch gradients are bitwise equal to single-threaded") {
    auto model = init_params({1, 5}, CellKind::Standard, 95);
    auto batch = testutil::random_batch(50, 3, 195);
    ModelParams g1 = zeros_like(model), g2 = zeros_like(model);
    const double l1 = batch_backward(model, batch, 0.3, 7, g1, 1);
    const double l2 = batch_backward(model, batch, 0.3, 7, g2, 4);
    CHECK(l1 == l2);
    auto r1 = trainable_params(g1), r2 = trainable_params(g2);
    for (std::size_t k = 0; k < r1.size(); ++k) CHECK(r1[k].mat->a == r2[k].mat->a);
}

TEST_CASE("non-finite gradients are reported with the parameter name") {
    auto model = init_params({1, 3}, CellKind::Standard, 96);
    model.head_w(0, 0) = std::numeric_limits<double>::infinity();
    auto batch = testutil::random_batch(4, 2, 196);
    ModelParams grads = zeros_like(model);
    CHECK_THROWS_AS((void)batch_backward(model, batch, 0.0, 0, grads, 1), numeric_error);
}
