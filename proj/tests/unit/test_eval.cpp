#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"

#include "mtc/common/error.hpp"
#include "mtc/eval/folds.hpp"
#include "mtc/eval/metrics.hpp"
#include "mtc/eval/protocols.hpp"
#include "mtc/eval/report.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mtc;
using namespace mtc::eval;
using dataset::Label;

namespace {

/// Overwrites payload-stream bytes [offset, offset + bytes.size()).
void plant(dataset::LabeledSession& s, std::size_t offset, const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    for (auto& sp : s.session.packets) {
        auto& pl = sp.packet.payload;
        for (std::size_t i = 0; i < pl.size(); ++i, ++pos)
            if (pos >= offset && pos < offset + bytes.size()) pl[i] = bytes[pos - offset];
    }
}

struct FamilyMark {
    std::string name;
    std::size_t offset;
    std::uint8_t value;
};

/// Benign sessions of random bytes plus one marked family per entry.
dataset::LabeledCorpus marked_corpus(std::uint64_t seed, std::size_t benign, std::size_t per_family,
                                     const std::vector<FamilyMark>& marks, const std::string& name = "MEM") {
    std::mt19937_64 gen(seed);
    dataset::LabeledCorpus c;
    c.dataset_name = name;
    for (std::size_t i = 0; i < benign; ++i)
        c.sessions.push_back(test::random_labeled_session(gen, Label::Benign, "benign", 800 + gen() % 200));
    for (const auto& m : marks) {
        for (std::size_t i = 0; i < per_family; ++i) {
            auto s = test::random_labeled_session(gen, Label::Malware, m.name, 800 + gen() % 200);
            plant(s, m.offset, std::vector<std::uint8_t>(32, m.value));
            c.sessions.push_back(std::move(s));
        }
    }
    return c;
}

/// Predicts a fixed class and remembers what it was given.
class RecordingPlugin : public ModelPlugin {
public:
    explicit RecordingPlugin(std::uint32_t constant) : constant_(constant) {}
    std::string name() const override { return "recording"; }
    nlohmann::json config() const override { return {{"model", "recording"}, {"constant", constant_}}; }
    classic::ProbabilityRows train_and_predict(const LabeledBatch& train, const LabeledBatch& test, std::uint32_t n,
                                               std::uint64_t, const std::string&) override {
        train_families.push_back({train.families.begin(), train.families.end()});
        train_ids.push_back({train.ids.begin(), train.ids.end()});
        test_families.push_back({test.families.begin(), test.families.end()});
        test_ids.push_back({test.ids.begin(), test.ids.end()});
        std::vector<double> row(n, 0.0);
        row[constant_] = 1.0;
        return classic::ProbabilityRows(test.size(), row);
    }
    std::vector<std::set<std::string>> train_families, train_ids, test_families, test_ids;

private:
    std::uint32_t constant_;
};

/// Wraps a real model and records the test ids of every call.
class Spy : public ModelPlugin {
public:
    explicit Spy(NativeParams p) : inner_(p) {}
    std::string name() const override { return inner_.name(); }
    nlohmann::json config() const override { return inner_.config(); }
    classic::ProbabilityRows train_and_predict(const LabeledBatch& train, const LabeledBatch& test, std::uint32_t n,
                                               std::uint64_t seed, const std::string& ctx) override {
        test_ids.push_back(test.ids);
        return inner_.train_and_predict(train, test, n, seed, ctx);
    }
    std::vector<std::vector<std::string>> test_ids;

private:
    NativePlugin inner_;
};

NativeParams rf(std::size_t trees = 30) {
    NativeParams p;
    p.kind = NativeKind::RandomForest;
    p.n_trees = trees;
    return p;
}

const features::ReprSpec kRaw = features::ReprSpec::parse("raw784");

} // namespace

TEST_SUITE("eval") {

TEST_CASE("metrics of a two-sample example") {
    const std::vector<std::string> cls = {"benign", "malware"};
    const std::vector<std::uint32_t> truth = {1, 0};
    const std::vector<std::uint32_t> pred = {1, 1};
    const auto r = compute_metrics(truth, pred, cls);
    CHECK(r.per_class[1].precision == 0.5);
    CHECK(r.per_class[1].recall == 1.0);
    CHECK(r.per_class[1].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.per_class[0].precision == 0.0);
    CHECK(r.per_class[0].recall == 0.0);
    CHECK(r.per_class[0].f1 == 0.0);
    CHECK(r.accuracy == 0.5);
    CHECK(r.confusion.counts == std::vector<std::vector<std::uint64_t>>{{0, 1}, {0, 1}});
}

TEST_CASE("metrics agree with an exact rational tally") {
    std::mt19937_64 gen(61);
    const std::vector<std::string> cls = {"a", "b", "c"};
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::uint32_t> truth(60), pred(60);
        for (auto& v : truth) v = static_cast<std::uint32_t>(gen() % 3);
        for (auto& v : pred) v = static_cast<std::uint32_t>(gen() % 3);
        const auto r = compute_metrics(truth, pred, cls);
        const auto want = oracle::tally(truth, pred, 3);
        double macro = 0;
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(r.per_class[c].precision == doctest::Approx(want[c].precision.value()).epsilon(1e-12));
            CHECK(r.per_class[c].recall == doctest::Approx(want[c].recall.value()).epsilon(1e-12));
            CHECK(r.per_class[c].f1 == doctest::Approx(want[c].f1.value()).epsilon(1e-12));
            CHECK(r.per_class[c].accuracy == doctest::Approx(want[c].accuracy.value()).epsilon(1e-12));
            macro += want[c].f1.value();
        }
        CHECK(r.macro_f1 == doctest::Approx(macro / 3).epsilon(1e-12));
        CHECK(r.confusion.total() == 60);
    }
}

TEST_CASE("metric input errors") {
    const std::vector<std::string> cls = {"a", "b"};
    CHECK_THROWS_AS(compute_metrics(std::vector<std::uint32_t>{0, 1}, std::vector<std::uint32_t>{0}, cls),
                    LengthMismatch);
    CHECK_THROWS_AS(compute_metrics(std::vector<std::uint32_t>{0, 2}, std::vector<std::uint32_t>{0, 1}, cls),
                    UnknownLabel);
    const auto empty = compute_metrics(std::vector<std::uint32_t>{}, std::vector<std::uint32_t>{}, cls);
    CHECK(empty.accuracy == 0.0);
}

TEST_CASE("mean report averages scalars and sums confusion") {
    const std::vector<std::string> cls = {"a", "b"};
    const std::vector<MetricsReport> folds = {
        compute_metrics(std::vector<std::uint32_t>{0, 1}, std::vector<std::uint32_t>{0, 1}, cls),
        compute_metrics(std::vector<std::uint32_t>{0, 1}, std::vector<std::uint32_t>{1, 1}, cls)};
    const auto m = mean_report(folds);
    CHECK(m.accuracy == 0.75);
    CHECK(m.confusion.total() == 4);
    CHECK(m.per_class[0].support == 2);
}

TEST_CASE("stratified folds keep class shares") {
    std::vector<std::uint32_t> y(20);
    for (std::size_t i = 10; i < 20; ++i) y[i] = 1;
    const auto f = stratified_kfold(y, 5, 9);
    for (std::uint32_t k = 0; k < 5; ++k) {
        std::size_t a = 0, b = 0;
        for (auto i : f.folds[k]) (y[i] == 0 ? a : b)++;
        CHECK(a == 2);
        CHECK(b == 2);
    }
    CHECK(f == stratified_kfold(y, 5, 9));
    CHECK_FALSE(f == stratified_kfold(y, 5, 10));

    const std::vector<std::uint32_t> eleven(11, 0);
    const auto g = stratified_kfold(eleven, 5, 1);
    std::vector<std::size_t> sizes;
    for (const auto& fold : g.folds) sizes.push_back(fold.size());
    CHECK(sizes == std::vector<std::size_t>{3, 2, 2, 2, 2});
}

TEST_CASE("folds partition the samples") {
    std::mt19937_64 gen(62);
    for (int rep = 0; rep < 30; ++rep) {
        const std::uint32_t k = 2 + static_cast<std::uint32_t>(gen() % 9);
        std::vector<std::uint32_t> y;
        for (std::uint32_t c = 0; c < 4; ++c)
            for (std::size_t i = 0; i < k + gen() % 40; ++i) y.push_back(c);
        std::shuffle(y.begin(), y.end(), gen);
        const auto f = stratified_kfold(y, k, gen());
        std::vector<int> seen(y.size(), 0);
        std::size_t mn = y.size(), mx = 0;
        for (std::uint32_t j = 0; j < k; ++j) {
            for (auto i : f.folds[j]) ++seen[i];
            mn = std::min(mn, f.folds[j].size());
            mx = std::max(mx, f.folds[j].size());
            CHECK(std::is_sorted(f.folds[j].begin(), f.folds[j].end()));
            CHECK(f.train_indices(j).size() + f.folds[j].size() == y.size());
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
        CHECK(mx - mn <= 1);
    }
    CHECK_THROWS_AS(stratified_kfold(std::vector<std::uint32_t>{0, 0, 1}, 2, 0), ClassTooSmall);
    CHECK_THROWS_AS(stratified_kfold(std::vector<std::uint32_t>{0, 0, 1, 1}, 1, 0), std::invalid_argument);
}

TEST_CASE("constant classifier scores one half on a balanced corpus") {
    const auto c = marked_corpus(70, 20, 20, {{"A", 0, 0xaa}});
    RecordingPlugin always_benign(0);
    const auto r = run_cv(c, always_benign, kRaw, Task::Binary, 5, 3);
    CHECK(r.mean.accuracy == 0.5);
    for (const auto& f : r.fold_reports) CHECK(f.accuracy == 0.5);
    CHECK(r.predictions.size() == 40);
}

TEST_CASE("every model sees the same folds") {
    const auto c = marked_corpus(71, 30, 30, {{"A", 0, 0xaa}});
    Spy forest(rf(5));
    NativeParams kp;
    kp.kind = NativeKind::Knn;
    Spy knn(kp);
    run_cv(c, forest, kRaw, Task::Binary, 5, 11);
    run_cv(c, knn, kRaw, Task::Binary, 5, 11);
    CHECK(forest.test_ids == knn.test_ids);
}

TEST_CASE("cross-validation on separable families") {
    const auto c = marked_corpus(72, 40, 30, {{"A", 0, 0xff}, {"B", 100, 0xff}, {"C", 300, 0xff}});
    Spy model(rf());
    const auto bin = run_cv(c, model, kRaw, Task::Binary, 5, 1);
    CHECK(bin.mean.accuracy >= 0.95);
    const auto fam = run_cv(c, model, kRaw, Task::Family, 5, 1);
    CHECK(fam.classes == std::vector<std::string>{"A", "B", "C"});
    CHECK(fam.mean.macro_f1 >= 0.95);
    const auto one = marked_corpus(73, 10, 10, {{"A", 0, 0xaa}});
    CHECK_THROWS_AS(run_cv(one, model, kRaw, Task::Family, 5, 1), ClassTooSmall);
}

TEST_CASE("zero-day keeps the held-out family out of training") {
    const auto c = marked_corpus(74, 30, 12, {{"A", 0, 0xff}, {"B", 100, 0xff}, {"C", 300, 0xff}});
    for (bool two_sided : {false, true}) {
        RecordingPlugin always_malware(1);
        const auto r = run_zero_day(c, always_malware, kRaw, "B", {two_sided, 5});
        REQUIRE(always_malware.train_families.size() == 1);
        CHECK(always_malware.train_families[0].count("B") == 0);
        CHECK(always_malware.train_families[0].count("A") == 1);
        for (const auto& id : always_malware.test_ids[0]) CHECK(always_malware.train_ids[0].count(id) == 0);
        if (two_sided) {
            CHECK(r.held_out_benign == 12);
            CHECK(r.test_size == 24);
            CHECK(r.accuracy == 0.5);
        } else {
            CHECK(always_malware.test_families[0] == std::set<std::string>{"B"});
            CHECK(r.test_size == 12);
            CHECK(r.accuracy == 1.0);
        }
    }
    RecordingPlugin m(1);
    CHECK_THROWS_AS(run_zero_day(c, m, kRaw, "Cridex"), UnknownFamily);
}

TEST_CASE("incremental steps") {
    const auto c = marked_corpus(75, 90, 30, {{"A", 0, 0xff}, {"B", 100, 0xff}, {"C", 300, 0xff}});
    Spy model(rf());
    const auto steps = run_incremental(c, model, kRaw, {"C", "A", "B"}, IncrementalTask::Both, 3, 2);
    REQUIRE(steps.size() == 3);
    CHECK(steps[0].families == std::vector<std::string>{"C"});
    CHECK(steps[0].family_accuracy == 1.0);
    CHECK(steps[2].families.size() == 3);
    for (const auto& s : steps) {
        CHECK(s.binary_accuracy.has_value());
        CHECK(*s.binary_accuracy >= 0.9);
    }
    CHECK_THROWS_AS(run_incremental(c, model, kRaw, {"A", "Z"}, IncrementalTask::Binary, 3, 2), UnknownFamily);
}

TEST_CASE("cross-dataset transfer follows shared bytes") {
    const auto train = marked_corpus(76, 40, 40, {{"A", 0, 0xaa}}, "TRAIN");
    const auto test = marked_corpus(77, 10, 30, {{"A2", 0, 0xaa}, {"Z", 400, 0x55}}, "TEST");
    Spy model(rf());
    const auto shared = run_cross_dataset(train, test, model, kRaw, "A", "A2", 4);
    CHECK(shared.accuracy >= 0.9);
    CHECK(shared.test_size == 30);
    const auto disjoint = run_cross_dataset(train, test, model, kRaw, "A", "Z", 4);
    CHECK(disjoint.accuracy <= 0.1);
    CHECK_THROWS_AS(run_cross_dataset(train, test, model, kRaw, "Q", "Z", 4), UnknownFamily);
}

TEST_CASE("family orders") {
    CHECK(mtab_family_order().size() >= 2);
    CHECK(ustcb_family_order().size() >= 2);
}

TEST_CASE("reports are reproducible and fingerprinted") {
    const auto c = marked_corpus(78, 20, 20, {{"A", 0, 0xaa}});
    Spy model(rf(5));
    const nlohmann::json cfg = {{"model", model.config()}, {"k", 5}};
    const auto a = make_report(cv_body(run_cv(c, model, kRaw, Task::Binary, 5, 8), cfg, 8));
    const auto b = make_report(cv_body(run_cv(c, model, kRaw, Task::Binary, 5, 8), cfg, 8));
    CHECK(dump_body(a) == dump_body(b));
    CHECK(a["body"]["fingerprint"] == config_fingerprint(cfg));
    CHECK(config_fingerprint(cfg) != config_fingerprint({{"model", model.config()}, {"k", 4}}));
    CHECK(config_fingerprint(nlohmann::json::parse(R"({"a":1,"b":2})")) ==
          config_fingerprint(nlohmann::json::parse(R"({"b":2,"a":1})")));
    for (const char* key : {"protocol", "config", "fingerprint", "seed"}) CHECK(a["body"].contains(key));

    test::TempDir dir("report");
    write_report(a, dir / "r.json");
    const auto back = read_report(dir / "r.json");
    CHECK(dump_body(back) == dump_body(a));
    CHECK_FALSE(render_report(back).empty());
    std::ofstream(dir / "bad.json") << "{\"nope\": 1}";
    CHECK_THROWS_AS(read_report(dir / "bad.json"), CorruptReport);
    CHECK_THROWS_AS(read_report(dir / "absent.json"), MissingFile);
}

}
