#include <cmath>
#include <vector>

#include "bcfp/forest.hpp"
#include "bcfp/metrics.hpp"
#include "bcfp/random.hpp"
#include "doctest.h"

using namespace bcfp;

namespace {

DenseMatrix column(std::vector<float> v) {
    DenseMatrix m(v.size(), 1);
    m.values = std::move(v);
    return m;
}

// Noisy two-class data: label depends on the first two of `d` columns.
std::pair<DenseMatrix, std::vector<int>> synthetic(std::size_t n, std::size_t d, std::uint64_t seed) {
    Pcg32 rng(seed, 5);
    DenseMatrix x(n, d);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            x.values[i * d + j] = static_cast<float>(rng.bounded(5));
        }
        const float s = x.values[i * d] + x.values[i * d + 1];
        y[i] = (s + static_cast<float>(rng.bounded(3)) > 5.0F) ? 1 : 0;
    }
    return {x, y};
}

}  // namespace

TEST_CASE("separable single feature") {
    const auto x = column({0, 0, 1, 1});
    const std::vector<int> y{0, 0, 1, 1};
    ForestParams p;
    p.n_trees = 1;
    p.max_features = MaxFeatures::All;
    p.bootstrap = false;
    const auto f = train_forest(x, y, p);
    REQUIRE(f.trees().size() == 1);
    const auto nodes = f.trees()[0].nodes();
    REQUIRE(nodes.size() == 3);
    CHECK(nodes[0].feature == 0);
    CHECK(nodes[0].threshold == doctest::Approx(0.5));
    const auto probs = f.predict_proba(x);
    CHECK(probs == std::vector<double>{0.0, 0.0, 1.0, 1.0});
    CHECK(f.trees()[0].depth() == 1);
}

TEST_CASE("constant feature gives a root leaf at the class prior") {
    const auto x = column({3, 3, 3, 3});
    const std::vector<int> y{0, 1, 1, 1};
    ForestParams p;
    p.n_trees = 1;
    p.bootstrap = false;
    const auto f = train_forest(x, y, p);
    CHECK(f.trees()[0].nodes().size() == 1);
    CHECK(f.predict_proba(x)[0] == doctest::Approx(0.75));
}

TEST_CASE("training errors") {
    const auto x = column({0, 1});
    CHECK_THROWS_AS((void)train_forest(x, std::vector<int>{1, 1}, {}), ModelError);
    CHECK_THROWS_AS((void)train_forest(DenseMatrix(0, 3), std::vector<int>{}, {}), ModelError);
    CHECK_THROWS_AS((void)train_forest(x, std::vector<int>{1}, {}), ModelError);
    ForestParams bad;
    bad.n_trees = 0;
    CHECK_THROWS_AS((void)train_forest(x, std::vector<int>{0, 1}, bad), ModelError);
}

TEST_CASE("determinism, thread independence and averaging") {
    const auto [x, y] = synthetic(200, 12, 1);
    ForestParams p;
    p.n_trees = 20;
    p.seed = 42;
    const auto a = train_forest(x, y, p);
    const auto b = train_forest(x, y, p);
    CHECK(a == b);
    p.jobs = 4;
    CHECK(train_forest(x, y, p) == a);
    p.seed = 43;
    CHECK_FALSE(train_forest(x, y, p) == a);

    const auto probs = a.predict_proba(x);
    for (std::size_t i = 0; i < x.rows; ++i) {
        double mean = 0.0;
        for (const auto& t : a.trees()) mean += t.predict(x.row(i));
        mean /= static_cast<double>(a.trees().size());
        CHECK(probs[i] == doctest::Approx(mean).epsilon(1e-12));
        CHECK(probs[i] >= 0.0);
        CHECK(probs[i] <= 1.0);
    }
    CHECK_THROWS_AS((void)a.predict_proba(DenseMatrix(2, 5)), ModelError);
}

TEST_CASE("forest learns a held-out signal") {
    const auto [x, y] = synthetic(600, 10, 2);
    const auto [tx, ty] = synthetic(300, 10, 3);
    ForestParams p;
    p.n_trees = 50;
    const auto f = train_forest(x, y, p);
    CHECK(auroc(f.predict_proba(tx), ty) > 0.8);
}

TEST_CASE("separable 1-D data has training AUROC 1") {
    Pcg32 rng(9, 9);
    std::vector<float> v;
    std::vector<int> y;
    for (int i = 0; i < 100; ++i) {
        const float value = static_cast<float>(rng.bounded(1000));
        v.push_back(value);
        y.push_back(value >= 500 ? 1 : 0);
    }
    const auto x = column(v);
    ForestParams p;
    p.n_trees = 10;
    p.seed = 3;
    const auto f = train_forest(x, y, p);
    CHECK(auroc(f.predict_proba(x), y) == doctest::Approx(1.0));
}

TEST_CASE("json round trip") {
    const auto [x, y] = synthetic(80, 6, 4);
    ForestParams p;
    p.n_trees = 5;
    p.max_depth = 4;
    const auto f = train_forest(x, y, p);
    for (const auto& t : f.trees()) CHECK(t.depth() <= 4);
    const auto back = Forest::from_json(f.to_json());
    CHECK(back == f);
    CHECK(back.predict_proba(x) == f.predict_proba(x));
    CHECK_THROWS((void)Forest::from_json("{\"format\":\"other\"}"));
}
