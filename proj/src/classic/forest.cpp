#include "mtc/classic/forest.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mtc/common/error.hpp"

namespace mtc::classic {

using features::TensorBatch;

std::vector<double> ForestModel::predict_proba(std::span<const float> x) const {
    std::vector<double> acc(n_classes(), 0.0);
    for (const auto& t : trees_) {
        const auto p = t.predict_proba(x);
        for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += p[c];
    }
    const double n = static_cast<double>(trees_.size());
    for (auto& v : acc) v /= n;
    return acc;
}

namespace {

struct Plan {
    detail::GrowOptions grow;
    bool bootstrap = true;
    std::uint32_t n_classes = 0;
    std::size_t feature_subsample = 0;
};

Plan make_plan(const TensorBatch& x, std::span<const std::uint32_t> y, const ForestParams& p,
               std::uint32_t n_classes) {
    if (x.count() == 0 || y.empty()) throw EmptyTrainingSet("forest needs at least one sample");
    if (x.count() != y.size()) throw LengthMismatch("feature rows and labels differ in length");
    if (p.n_trees == 0) throw std::invalid_argument("n_trees must be >= 1");
    Plan plan;
    plan.n_classes = n_classes == 0 ? infer_class_count(y) : n_classes;
    for (auto v : y)
        if (v >= plan.n_classes) throw UnknownLabel("label " + std::to_string(v) + " out of class range");
    const std::size_t d = x.row_size();
    plan.feature_subsample =
        p.feature_subsample == 0 ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d)))) : p.feature_subsample;
    plan.feature_subsample = std::min(plan.feature_subsample, d);
    plan.bootstrap = p.bootstrap.value_or(p.mode == ForestMode::RandomForest);
    plan.grow.tree = p.tree;
    plan.grow.rule = p.mode == ForestMode::RandomForest ? detail::SplitRule::Best : detail::SplitRule::RandomThreshold;
    plan.grow.features_per_split = plan.feature_subsample;
    return plan;
}

DecisionTree grow_one(const TensorBatch& x, std::span<const std::uint32_t> y, const Plan& plan, std::uint64_t seed,
                      std::size_t tree_index) {
    CounterRng rng(seed, tree_index);
    const std::size_t n = x.count();
    std::vector<std::size_t> samples(n);
    if (plan.bootstrap) {
        for (auto& s : samples) s = static_cast<std::size_t>(rng.below(n));
    } else {
        std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    return detail::grow_tree(x, y, plan.n_classes, std::move(samples), plan.grow, rng);
}

} // namespace

ForestModel fit_forest(const TensorBatch& x, std::span<const std::uint32_t> y, const ForestParams& params,
                       std::uint32_t n_classes) {
    const Plan plan = make_plan(x, y, params, n_classes);
    std::vector<DecisionTree> trees(params.n_trees);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t t = 0; t < params.n_trees; ++t) trees[t] = grow_one(x, y, plan, params.seed, t);
    return ForestModel(std::move(trees), params.mode, plan.feature_subsample, params.seed);
}

ForestModel fit_forest_serial(const TensorBatch& x, std::span<const std::uint32_t> y, const ForestParams& params,
                              std::uint32_t n_classes) {
    const Plan plan = make_plan(x, y, params, n_classes);
    std::vector<DecisionTree> trees;
    trees.reserve(params.n_trees);
    for (std::size_t t = 0; t < params.n_trees; ++t) trees.push_back(grow_one(x, y, plan, params.seed, t));
    return ForestModel(std::move(trees), params.mode, plan.feature_subsample, params.seed);
}

ProbabilityRows predict_forest_batch(const ForestModel& model, const TensorBatch& x) {
    if (x.count() > 0 && x.row_size() != model.n_features())
        throw DimensionMismatch("forest expects " + std::to_string(model.n_features()) + " features");
    ProbabilityRows out(x.count());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < x.count(); ++i) out[i] = model.predict_proba(x.row(i));
    return out;
}

ProbabilityRows predict_forest_batch_serial(const ForestModel& model, const TensorBatch& x) {
    ProbabilityRows out;
    out.reserve(x.count());
    for (std::size_t i = 0; i < x.count(); ++i) out.push_back(model.predict_proba(x.row(i)));
    return out;
}

} // namespace mtc::classic
