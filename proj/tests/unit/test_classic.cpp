#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"

#include "mtc/classic/forest.hpp"
#include "mtc/classic/knn.hpp"
#include "mtc/classic/model_io.hpp"
#include "mtc/classic/tree.hpp"
#include "mtc/common/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mtc;
using namespace mtc::classic;
using features::TensorBatch;

namespace {

struct Data {
    TensorBatch x;
    std::vector<std::uint32_t> y;
};

Data blobs(std::uint64_t seed, std::size_t per_class, std::uint32_t classes, std::size_t d, double spread) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, spread);
    Data out{TensorBatch({static_cast<std::uint32_t>(d)}), {}};
    for (std::uint32_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            std::vector<float> row(d);
            for (std::size_t j = 0; j < d; ++j) row[j] = static_cast<float>((j % classes == c ? 3.0 : 0.0) + noise(gen));
            out.x.append_row(row);
            out.y.push_back(c);
        }
    }
    return out;
}

/// Small integer grid values so that many candidate splits tie exactly.
Data grid(std::uint64_t seed, std::size_t n, std::size_t d, std::uint32_t classes) {
    std::mt19937_64 gen(seed);
    Data out{TensorBatch({static_cast<std::uint32_t>(d)}), {}};
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<float> row(d);
        for (auto& v : row) v = static_cast<float>(gen() % 5);
        out.x.append_row(row);
        out.y.push_back(static_cast<std::uint32_t>(gen() % classes));
    }
    return out;
}

double training_accuracy(const DecisionTree& t, const Data& d) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < d.y.size(); ++i) ok += t.predict(d.x.row(i)) == d.y[i];
    return static_cast<double>(ok) / static_cast<double>(d.y.size());
}

} // namespace

TEST_SUITE("classic") {

TEST_CASE("single-class training data gives one leaf") {
    TensorBatch x({2}, {1, 2, 3, 4, 5, 6});
    const std::vector<std::uint32_t> y = {1, 1, 1};
    const auto t = fit_tree(x, y);
    CHECK(t.nodes().size() == 1);
    CHECK(t.leaf_count() == 1);
    CHECK(t.predict(std::vector<float>{0, 0}) == 1);
}

TEST_CASE("one-dimensional split at the midpoint") {
    TensorBatch x({1}, {0, 1, 10, 11});
    const std::vector<std::uint32_t> y = {0, 0, 1, 1};
    const auto t = fit_tree(x, y);
    REQUIRE(t.nodes().size() == 3);
    CHECK(t.nodes()[0].feature == 0);
    CHECK(t.nodes()[0].threshold == 5.5);
    CHECK(t.predict(std::vector<float>{5.5f}) == 0);
    CHECK(t.predict(std::vector<float>{10.5f}) == 1);
    CHECK(t.predict(std::vector<float>{-100.0f}) == 0);
}

TEST_CASE("xor is learned exactly") {
    TensorBatch x({2}, {0, 0, 0, 1, 1, 0, 1, 1});
    const std::vector<std::uint32_t> y = {0, 1, 1, 0};
    const auto t = fit_tree(x, y);
    const Data d{x, y};
    CHECK(training_accuracy(t, d) == 1.0);
}

TEST_CASE("root split matches exhaustive enumeration") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto d = grid(seed, 12 + seed % 20, 1 + seed % 4, 2 + seed % 3);
        const auto t = fit_tree(d.x, d.y, {}, 4);
        const auto want = oracle::best_root_split(d.x, d.y, 4);
        CAPTURE(seed);
        const bool pure = std::all_of(d.y.begin(), d.y.end(), [&](auto v) { return v == d.y.front(); });
        if (!want || pure) {
            CHECK(t.nodes()[0].is_leaf());
            continue;
        }
        REQUIRE_FALSE(t.nodes()[0].is_leaf());
        CHECK(static_cast<std::size_t>(t.nodes()[0].feature) == want->feature);
        CHECK(t.nodes()[0].threshold == want->threshold);
    }
}

TEST_CASE("unbounded trees fit distinct points perfectly") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto d = blobs(seed, 30, 3, 4, 2.0);
        const auto t = fit_tree(d.x, d.y);
        CHECK(training_accuracy(t, d) == 1.0);
        for (const auto& n : t.nodes())
            if (n.is_leaf()) CHECK(std::abs(std::accumulate(n.probs.begin(), n.probs.end(), 0.0) - 1.0) < 1e-12);
    }
}

TEST_CASE("depth and split-size limits") {
    auto d = blobs(3, 40, 3, 4, 2.0);
    CHECK(fit_tree(d.x, d.y, {std::size_t{1}, 2}).depth() <= 1);
    CHECK(fit_tree(d.x, d.y, {std::size_t{0}, 2}).nodes().size() == 1);
    CHECK(fit_tree(d.x, d.y, {std::nullopt, 1000}).nodes().size() == 1);
}

TEST_CASE("tree error cases") {
    TensorBatch x({2}, {1, 2, 3, 4});
    const std::vector<std::uint32_t> y = {0, 1};
    const auto t = fit_tree(x, y);
    CHECK_THROWS_AS(t.predict(std::vector<float>{1, 2, 3}), DimensionMismatch);
    CHECK_THROWS_AS(fit_tree(TensorBatch({2}), std::vector<std::uint32_t>{}), EmptyTrainingSet);
    CHECK_THROWS_AS(fit_tree(x, std::vector<std::uint32_t>{0}), LengthMismatch);
}

TEST_CASE("one-tree forest without bootstrap equals the decision tree") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto d = blobs(seed, 25, 3, 5, 2.5);
        ForestParams p;
        p.n_trees = 1;
        p.bootstrap = false;
        p.feature_subsample = 5;
        p.seed = seed;
        const auto f = fit_forest(d.x, d.y, p);
        const auto t = fit_tree(d.x, d.y);
        CHECK(f.trees().front() == t);
        std::mt19937_64 gen(seed);
        std::uniform_real_distribution<float> u(-2, 5);
        for (int i = 0; i < 200; ++i) {
            std::vector<float> q(5);
            for (auto& v : q) v = u(gen);
            const auto a = f.predict_proba(q);
            const auto b = t.predict_proba(q);
            CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
        }
    }
}

TEST_CASE("forests are reproducible and thread-independent") {
    auto d = blobs(9, 40, 3, 8, 2.0);
    for (auto mode : {ForestMode::RandomForest, ForestMode::ExtraTrees}) {
        ForestParams p;
        p.mode = mode;
        p.n_trees = 24;
        p.seed = 77;
        const auto a = fit_forest(d.x, d.y, p);
        CHECK(a == fit_forest(d.x, d.y, p));
        CHECK(a == fit_forest_serial(d.x, d.y, p));
        CHECK(predict_forest_batch(a, d.x) == predict_forest_batch_serial(a, d.x));
        p.seed = 78;
        CHECK_FALSE(a == fit_forest(d.x, d.y, p));
    }
}

TEST_CASE("forests separate gaussian blobs") {
    auto train = blobs(21, 100, 3, 6, 0.8);
    auto test = blobs(22, 100, 3, 6, 0.8);
    for (auto mode : {ForestMode::RandomForest, ForestMode::ExtraTrees}) {
        ForestParams p;
        p.mode = mode;
        p.n_trees = 50;
        p.seed = 5;
        const auto f = fit_forest(train.x, train.y, p);
        const auto labels = hard_labels(predict_forest_batch(f, test.x));
        std::size_t ok = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) ok += labels[i] == test.y[i];
        CHECK(static_cast<double>(ok) / static_cast<double>(labels.size()) >= 0.99);
    }
}

TEST_CASE("forest probability averaging and tie-break") {
    TreeNode a;
    a.probs = {1.0, 0.0};
    TreeNode b;
    b.probs = {0.0, 1.0};
    const ForestModel f({DecisionTree({a}, 1, 2), DecisionTree({b}, 1, 2)}, ForestMode::RandomForest, 1, 0);
    const auto p = f.predict_proba(std::vector<float>{0.0f});
    CHECK(p == std::vector<double>{0.5, 0.5});
    CHECK(f.predict(std::vector<float>{0.0f}) == 0);
}

TEST_CASE("knn matches sorting every training point") {
    std::mt19937_64 gen(31);
    std::uniform_int_distribution<int> u(0, 4);
    TensorBatch x({3});
    std::vector<std::uint32_t> y;
    for (int i = 0; i < 20; ++i) {
        x.append_row(std::vector<float>{float(u(gen)), float(u(gen)), float(u(gen))});
        y.push_back(static_cast<std::uint32_t>(gen() % 3));
    }
    for (std::uint32_t k : {1u, 3u, 5u}) {
        const KnnModel m(x, y, k, 3);
        for (int q = 0; q < 30; ++q) {
            const std::vector<float> query{float(u(gen)), float(u(gen)), float(u(gen))};
            CHECK(m.predict_proba(query) == oracle::knn_proba(x, y, query, k, 3));
        }
    }
}

TEST_CASE("knn vote fractions") {
    TensorBatch x({1}, {0, 1, 2, 50});
    const std::vector<std::uint32_t> y = {0, 0, 1, 1};
    const KnnModel m(x, y, 3);
    const auto p = m.predict_proba(std::vector<float>{0.5f});
    CHECK(p[0] == doctest::Approx(2.0 / 3.0));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0));
    CHECK(m.predict(std::vector<float>{0.5f}) == 0);
    CHECK_THROWS_AS(KnnModel(x, y, 0), std::invalid_argument);
    CHECK_THROWS_AS(KnnModel(x, y, 5), std::invalid_argument);
    CHECK_THROWS_AS(m.predict(std::vector<float>{1, 2}), DimensionMismatch);
    CHECK_THROWS_AS(KnnModel(TensorBatch({1}), {}, 1), EmptyTrainingSet);
}

TEST_CASE("knn batch equals the serial reference") {
    auto train = blobs(41, 50, 3, 10, 1.5);
    auto test = blobs(42, 40, 3, 10, 1.5);
    const KnnModel m(train.x, train.y, 5);
    CHECK(knn_predict_batch(m, test.x) == knn_predict_batch_serial(m, test.x));
}

TEST_CASE("model files round-trip and reject corruption") {
    test::TempDir dir("models");
    auto d = blobs(51, 20, 2, 3, 1.0);
    ForestParams p;
    p.n_trees = 5;
    p.seed = 3;
    const std::vector<ClassicModel> models = {fit_tree(d.x, d.y), fit_forest(d.x, d.y, p), KnnModel(d.x, d.y, 3)};
    int i = 0;
    for (const auto& m : models) {
        const auto path = dir / ("m" + std::to_string(i++) + ".bin");
        save_model(m, path);
        CHECK(load_model(path) == m);
        auto bytes = encode_model(m);
        CHECK(decode_model(bytes) == m);
        auto bad = bytes;
        bad[0] = 'Z';
        CHECK_THROWS_AS(decode_model(bad), CorruptModelFile);
        bad = bytes;
        bad.resize(bytes.size() - 3);
        CHECK_THROWS_AS(decode_model(bad), CorruptModelFile);
        bad = bytes;
        bad.push_back(0);
        CHECK_THROWS_AS(decode_model(bad), CorruptModelFile);
    }
}

}
