#include "mtc/eval/protocols.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "mtc/common/error.hpp"
#include "mtc/common/rng.hpp"
#include "mtc/dataset/filters.hpp"
#include "mtc/features/extractors.hpp"

namespace mtc::eval {

using dataset::Label;
using dataset::LabeledCorpus;

std::string to_string(Task t) { return t == Task::Binary ? "binary" : "family"; }

Task parse_task(const std::string& name) {
    if (name == "binary") return Task::Binary;
    if (name == "family") return Task::Family;
    throw std::invalid_argument("unknown task '" + name + "' (expected binary or family)");
}

std::vector<std::string> task_classes(const LabeledCorpus& corpus, Task task) {
    if (task == Task::Binary) return {"benign", "malware"};
    return dataset::malware_families(corpus);
}

LabeledBatch make_batch(const LabeledCorpus& corpus, const features::ReprSpec& repr, Task task,
                        const std::vector<std::string>& classes) {
    std::vector<dataset::LabeledSession> kept;
    LabeledBatch b;
    for (const auto& ls : corpus.sessions) {
        if (task == Task::Family && ls.label != Label::Malware) continue;
        std::uint32_t y = 0;
        if (task == Task::Binary) {
            y = ls.label == Label::Benign ? 0 : 1;
        } else {
            const auto it = std::find(classes.begin(), classes.end(), ls.family);
            if (it == classes.end()) throw UnknownFamily("family '" + ls.family + "' not in class list");
            y = static_cast<std::uint32_t>(it - classes.begin());
        }
        b.y.push_back(y);
        b.ids.push_back(to_hex(ls.session_id));
        b.families.push_back(ls.family);
        kept.push_back(ls);
    }
    b.x = features::extract_batch(kept, repr);
    return b;
}

namespace {

std::vector<SamplePrediction> collect(const LabeledBatch& test, const classic::ProbabilityRows& probs, int fold) {
    std::vector<SamplePrediction> out;
    out.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        out.push_back({test.ids[i], fold, test.y[i], classic::argmax(probs[i]), probs[i]});
    return out;
}

void check_disjoint(const LabeledBatch& train, const LabeledBatch& test) {
    const std::set<std::string> train_ids(train.ids.begin(), train.ids.end());
    for (const auto& id : test.ids)
        if (train_ids.count(id)) throw std::logic_error("leakage: session " + id + " in both train and test");
}

classic::ProbabilityRows predict_checked(ModelPlugin& model, const LabeledBatch& train, const LabeledBatch& test,
                                         std::uint32_t n_classes, std::uint64_t seed, const std::string& context) {
    auto probs = model.train_and_predict(train, test, n_classes, seed, context);
    if (probs.size() != test.size()) throw PluginError(context + ": wrong number of prediction rows");
    for (const auto& row : probs)
        if (row.size() != n_classes) throw PluginError(context + ": wrong number of probability columns");
    return probs;
}

} // namespace

CvResult run_cv(const LabeledCorpus& corpus, ModelPlugin& model, const features::ReprSpec& repr, Task task,
                std::uint32_t k, std::uint64_t seed) {
    CvResult res;
    res.task = task;
    res.classes = task_classes(corpus, task);
    if (task == Task::Family && res.classes.size() < 2)
        throw ClassTooSmall("family classification needs at least two malware families");
    const LabeledBatch all = make_batch(corpus, repr, task, res.classes);
    res.folds = stratified_kfold(all.y, k, seed);
    const auto n_classes = static_cast<std::uint32_t>(res.classes.size());

    for (std::uint32_t f = 0; f < k; ++f) {
        const auto train_idx = res.folds.train_indices(f);
        const auto test_idx = res.folds.test_indices(f);
        const LabeledBatch train = all.select(train_idx);
        const LabeledBatch test = all.select(test_idx);
        check_disjoint(train, test);
        const std::string context = "cv fold " + std::to_string(f);
        const auto probs = predict_checked(model, train, test, n_classes, derive_seed(seed, f), context);
        const auto preds = classic::hard_labels(probs);
        MetricsReport rep = compute_metrics(test.y, preds, res.classes);
        rep.fold = static_cast<int>(f);
        res.fold_reports.push_back(std::move(rep));
        auto samples = collect(test, probs, static_cast<int>(f));
        res.predictions.insert(res.predictions.end(), samples.begin(), samples.end());
    }
    res.mean = mean_report(res.fold_reports);
    return res;
}

ZeroDayResult run_zero_day(const LabeledCorpus& corpus, ModelPlugin& model, const features::ReprSpec& repr,
                           const std::string& family, const ZeroDayOptions& options) {
    LabeledCorpus train_c{corpus.dataset_name, {}};
    LabeledCorpus test_c{corpus.dataset_name, {}};
    std::vector<std::size_t> benign;
    for (std::size_t i = 0; i < corpus.sessions.size(); ++i) {
        const auto& ls = corpus.sessions[i];
        if (ls.label == Label::Malware && ls.family == family) test_c.sessions.push_back(ls);
        else if (ls.label == Label::Benign) benign.push_back(i);
    }
    if (test_c.sessions.empty()) throw UnknownFamily("family '" + family + "' not present in corpus");

    std::vector<char> benign_to_test(corpus.sessions.size(), 0);
    std::size_t held_benign = 0;
    if (options.two_sided && !benign.empty()) {
        const std::size_t want = std::min(test_c.sessions.size(), benign.size() / 2);
        CounterRng rng(options.seed, 0x2e40da7ULL);
        for (auto p : sample_without_replacement(benign.size(), want, rng)) benign_to_test[benign[p]] = 1;
        held_benign = want;
    }
    for (std::size_t i = 0; i < corpus.sessions.size(); ++i) {
        const auto& ls = corpus.sessions[i];
        if (ls.label == Label::Malware && ls.family == family) continue;
        if (benign_to_test[i]) test_c.sessions.push_back(ls);
        else train_c.sessions.push_back(ls);
    }

    const std::vector<std::string> classes = {"benign", "malware"};
    const LabeledBatch train = make_batch(train_c, repr, Task::Binary, classes);
    const LabeledBatch test = make_batch(test_c, repr, Task::Binary, classes);
    check_disjoint(train, test);
    for (const auto& f : train.families)
        if (f == family) throw std::logic_error("leakage: held-out family '" + family + "' in training set");

    const auto probs = predict_checked(model, train, test, 2, options.seed, "zero-day " + family);
    ZeroDayResult res;
    res.family = family;
    res.train_size = train.size();
    res.test_size = test.size();
    res.held_out_benign = held_benign;
    res.predictions = collect(test, probs, -1);
    std::size_t correct = 0;
    for (const auto& p : res.predictions) correct += p.predicted == p.truth;
    res.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    return res;
}

std::vector<IncrementalStep> run_incremental(const LabeledCorpus& corpus, ModelPlugin& model,
                                             const features::ReprSpec& repr, const std::vector<std::string>& order,
                                             IncrementalTask task, std::uint32_t k, std::uint64_t seed) {
    const auto families = dataset::malware_families(corpus);
    std::set<std::string> seen;
    for (const auto& f : order) {
        if (!std::binary_search(families.begin(), families.end(), f))
            throw UnknownFamily("family '" + f + "' from the order is not in the corpus");
        if (!seen.insert(f).second) throw std::invalid_argument("family '" + f + "' repeated in order");
    }

    std::vector<IncrementalStep> steps;
    for (std::size_t i = 1; i <= order.size(); ++i) {
        IncrementalStep step;
        step.step = i;
        step.families.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(i));
        const std::set<std::string> included(step.families.begin(), step.families.end());

        LabeledCorpus sub{corpus.dataset_name, {}};
        for (const auto& ls : corpus.sessions)
            if (ls.label == Label::Benign || included.count(ls.family)) sub.sessions.push_back(ls);

        const std::uint64_t step_seed = derive_seed(seed, 0x1ac0000ULL + i);
        if (task != IncrementalTask::Family) {
            const auto balanced = dataset::balance_benign_malware(sub, step_seed);
            step.binary_accuracy = run_cv(balanced, model, repr, Task::Binary, k, step_seed).mean.accuracy;
        }
        if (task != IncrementalTask::Binary) {
            step.family_accuracy = i == 1 ? 1.0 : run_cv(sub, model, repr, Task::Family, k, step_seed).mean.accuracy;
        }
        steps.push_back(std::move(step));
    }
    return steps;
}

CrossDatasetResult run_cross_dataset(const LabeledCorpus& train, const LabeledCorpus& test, ModelPlugin& model,
                                     const features::ReprSpec& repr, const std::string& train_family,
                                     const std::string& test_family, std::uint64_t seed) {
    const auto has = [](const LabeledCorpus& c, const std::string& f) {
        return std::any_of(c.sessions.begin(), c.sessions.end(),
                           [&](const auto& ls) { return ls.label == Label::Malware && ls.family == f; });
    };
    if (!has(train, train_family)) throw UnknownFamily("family '" + train_family + "' not in the training corpus");
    if (!has(test, test_family)) throw UnknownFamily("family '" + test_family + "' not in the test corpus");

    LabeledCorpus test_c{test.dataset_name, {}};
    for (const auto& ls : test.sessions)
        if (ls.label == Label::Malware && ls.family == test_family) test_c.sessions.push_back(ls);

    const std::vector<std::string> classes = {"benign", "malware"};
    const LabeledBatch tr = make_batch(train, repr, Task::Binary, classes);
    const LabeledBatch te = make_batch(test_c, repr, Task::Binary, classes);
    const auto probs = predict_checked(model, tr, te, 2, seed, "cross " + train_family + "/" + test_family);

    CrossDatasetResult res;
    res.train_family = train_family;
    res.test_family = test_family;
    res.train_size = tr.size();
    res.test_size = te.size();
    std::size_t flagged = 0;
    for (const auto& p : probs) flagged += classic::argmax(p) == 1;
    res.accuracy = static_cast<double>(flagged) / static_cast<double>(te.size());
    return res;
}

const std::vector<std::string>& mtab_family_order() {
    static const std::vector<std::string> order = {"Dridex", "Emotet", "Hancitor", "Valak",
                                                   "Bazarloader", "Icedid", "Zloader", "Qakbot"};
    return order;
}

const std::vector<std::string>& ustcb_family_order() {
    static const std::vector<std::string> order = {"Cridex", "Geodo", "Htbot", "Shifu", "Zeus",
                                                   "Miuref", "Neris", "Nsis", "Virut"};
    return order;
}

} // namespace mtc::eval
