#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "debias/fields.hpp"
#include "debias/gradient_boost.hpp"
#include "debias/rng.hpp"

using namespace debias;

TEST_CASE("linear field arithmetic") {
    const Field constant = LinearField{0.0, 0.0, 5.0};
    CHECK(predict(constant, {12, -7}) == 5.0);
    CHECK(predict(constant, {0, 0}) == 5.0);

    const Field ramp = LinearField{0.01, 0.0, 0.0};
    CHECK(predict(ramp, {50, 20}) == 0.5);
    CHECK(predict(ramp, {100, 0}) == 1.0);

    const Field mixed = LinearField{2.0, -3.0, 1.0};
    CHECK(predict(mixed, {1, 1}) == 0.0);
    CHECK(predict(mixed, {2, 0.5}) == doctest::Approx(3.5).epsilon(1e-15));
    CHECK(predict(mixed, {0, 0}) == 1.0);
}

TEST_CASE("random linear fields stay in the documented ranges") {
    const Domain d(0, 0, 100, 100);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const LinearField f = make_random_linear(d, seed);
        CHECK(std::abs(f.a1) <= 0.01);
        CHECK(std::abs(f.a2) <= 0.01);
        CHECK(f.b >= 0.0);
        CHECK(f.b < 1.0);
    }
    const LinearField a = make_random_linear(d, 7);
    const LinearField b = make_random_linear(d, 7);
    CHECK(a.a1 == b.a1);
    CHECK(a.a2 == b.a2);
    CHECK(a.b == b.b);
}

TEST_CASE("rbf field values") {
    RbfField f;
    f.centers = {{10, 10}};
    f.amplitudes = {1.0};
    f.widths = {4.0};
    CHECK(predict(Field{f}, {10, 10}) == 1.0);
    // At distance exactly one width: exp(-1/2).
    CHECK(predict(Field{f}, {14, 10}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));

    RbfField zero;
    zero.centers = {{10, 10}, {40, 70}};
    zero.amplitudes = {0.0, 0.0};
    zero.widths = {5.0, 20.0};
    Rng rng(1);
    for (int i = 0; i < 20; ++i)
        CHECK(predict(Field{zero}, {rng.uniform(0, 100), rng.uniform(0, 100)}) == 0.0);
}

TEST_CASE("rbf field matches the direct formula") {
    const Domain d(0, 0, 100, 100);
    const RbfField f = make_random_rbf(d, 6, 99);
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        const Vec2 x{rng.uniform(0, 100), rng.uniform(0, 100)};
        double direct = 0.0;
        for (std::size_t j = 0; j < f.centers.size(); ++j) {
            const double r2 = squared_norm(x - f.centers[j]);
            direct += f.amplitudes[j] * std::exp(-r2 / (2.0 * f.widths[j] * f.widths[j]));
        }
        const double got = predict(Field{f}, x);
        CHECK(std::abs(got - direct) <= 1e-12 * std::max(std::abs(direct), 1e-30));
    }
}

TEST_CASE("random rbf fields stay in the documented ranges") {
    const Domain d(0, 0, 100, 100);
    const RbfField f = make_random_rbf(d, 10, 4);
    REQUIRE(f.centers.size() == 10);
    REQUIRE(f.amplitudes.size() == 10);
    REQUIRE(f.widths.size() == 10);
    for (std::size_t j = 0; j < 10; ++j) {
        CHECK(d.contains(f.centers[j]));
        CHECK(std::abs(f.amplitudes[j]) <= 1.0);
        CHECK(f.widths[j] >= 10.0);
        CHECK(f.widths[j] <= 40.0);
    }
    const RbfField g = make_random_rbf(d, 10, 4);
    bool identical = true;
    for (std::size_t j = 0; j < 10; ++j)
        identical = identical && f.centers[j].x == g.centers[j].x &&
                    f.centers[j].y == g.centers[j].y && f.amplitudes[j] == g.amplitudes[j] &&
                    f.widths[j] == g.widths[j];
    CHECK(identical);
    CHECK_THROWS_AS(make_random_rbf(d, 0, 1), std::invalid_argument);
}

TEST_CASE("pointwise error definition") {
    const Field ramp = LinearField{0.01, 0.0, 0.0};
    const Field zero = LinearField{0.0, 0.0, 0.0};

    const FieldPair identical{ramp, ramp};
    Rng rng(5);
    for (int i = 0; i < 20; ++i)
        CHECK(pointwise_error(identical, {rng.uniform(0, 100), rng.uniform(0, 100)}) == 0.0);

    const FieldPair constants{LinearField{0, 0, 1.0}, LinearField{0, 0, 3.0}};
    CHECK(pointwise_error(constants, {33, 44}) == 4.0);

    const FieldPair ramp_vs_zero{ramp, zero};
    CHECK(pointwise_error(ramp_vs_zero, {100, 0}) == 1.0);

    // Symmetric in (truth, predictor); zero only where the values coincide.
    const FieldPair flipped{zero, ramp};
    for (int i = 0; i < 20; ++i) {
        const Vec2 x{rng.uniform(0, 100), rng.uniform(0, 100)};
        CHECK(pointwise_error(ramp_vs_zero, x) == pointwise_error(flipped, x));
        if (x.x != 0.0)
            CHECK(pointwise_error(ramp_vs_zero, x) > 0.0);
    }
}

TEST_CASE("boosting on constant targets is the constant") {
    std::vector<Vec2> xs;
    std::vector<double> ys;
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
        xs.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
        ys.push_back(3.25);
    }
    const auto model = fit_gradient_boost(xs, ys, {});
    CHECK(model.base_value == 3.25);
    for (const auto& tree : model.trees) {
        REQUIRE(tree.nodes.size() == 1);
        CHECK(tree.nodes[0].is_leaf);
        CHECK(tree.nodes[0].leaf == 0.0);
    }
    CHECK(model.value(xs[0]) == 3.25);
    CHECK(model.value({-5, 200}) == 3.25);
}

TEST_CASE("boosting with no trees is the target mean") {
    std::vector<Vec2> xs{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0},
                         {5, 1}, {6, 1}, {7, 1}, {8, 1}, {9, 1}};
    std::vector<double> ys{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    BoostParams params;
    params.n_trees = 0;
    const auto model = fit_gradient_boost(xs, ys, params);
    CHECK(model.trees.empty());
    CHECK(model.value({4, 0.5}) == 5.5);
}

TEST_CASE("boosting learns a step function") {
    Rng rng(20240815);
    std::vector<Vec2> xs(1000);
    std::vector<double> ys(1000);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = {rng.uniform(0, 100), rng.uniform(0, 100)};
        ys[i] = xs[i].x > 50.0 ? 1.0 : 0.0;
    }
    BoostParams params;
    params.n_trees = 50;
    params.max_depth = 2;
    params.learning_rate = 0.3;
    const auto model = fit_gradient_boost(xs, ys, params);

    REQUIRE(!model.training_loss.empty());
    INFO("final training mse ", model.training_loss.back());
    CHECK(model.training_loss.back() < 0.01);

    // Loss after each round never increases (first entry is the base mse).
    for (std::size_t i = 1; i < model.training_loss.size(); ++i)
        CHECK(model.training_loss[i] <= model.training_loss[i - 1] + 1e-15);

    CHECK(model.value({25, 50}) == doctest::Approx(0.0).epsilon(0.1));
    CHECK(model.value({75, 50}) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("boosting fits a smooth field") {
    const Domain d(0, 0, 100, 100);
    const RbfField truth = make_random_rbf(d, 5, 13);
    Rng rng(14);
    std::vector<Vec2> xs(800);
    std::vector<double> ys(800);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = {rng.uniform(0, 100), rng.uniform(0, 100)};
        ys[i] = predict(Field{truth}, xs[i]);
    }
    const auto model = fit_gradient_boost(xs, ys, {});

    // Loss drops well below the target variance and never increases.
    for (std::size_t i = 1; i < model.training_loss.size(); ++i)
        CHECK(model.training_loss[i] <= model.training_loss[i - 1] + 1e-15);
    CHECK(model.training_loss.back() < 0.2 * model.training_loss.front());

    // Depth bound holds structurally: a depth-3 tree has at most 15 nodes.
    for (const auto& tree : model.trees)
        CHECK(tree.nodes.size() <= 15);

    // The fitted predictor dispatches through the field variant.
    const Field as_field = model;
    CHECK(predict(as_field, {50, 50}) == model.value({50, 50}));
}

TEST_CASE("boosting input validation") {
    std::vector<Vec2> xs{{0, 0}, {1, 1}};
    std::vector<double> ys{1.0, 2.0};
    BoostParams params;

    CHECK_THROWS_AS(fit_gradient_boost(std::vector<Vec2>{}, std::vector<double>{}, params),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_gradient_boost(xs, std::vector<double>{1.0}, params),
                    std::invalid_argument);
    // Fewer than 2 * min_leaf points.
    CHECK_THROWS_AS(fit_gradient_boost(xs, ys, params), std::invalid_argument);

    std::vector<Vec2> xs10(10, Vec2{1, 1});
    std::vector<double> bad(10, 1.0);
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_gradient_boost(xs10, bad, params), std::invalid_argument);

    params.n_trees = -1;
    std::vector<double> good(10, 1.0);
    CHECK_THROWS_AS(fit_gradient_boost(xs10, good, params), std::invalid_argument);
}
