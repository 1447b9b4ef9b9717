#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mtc/classic/tree.hpp"

namespace mtc::classic {

enum class ForestMode : std::uint8_t { RandomForest = 0, ExtraTrees = 1 };

struct ForestParams {
    ForestMode mode = ForestMode::RandomForest;
    std::size_t n_trees = 100;
    std::size_t feature_subsample = 0; ///< features drawn per split; 0 = ceil(sqrt(d))
    std::optional<bool> bootstrap;     ///< default: true for RF, false for ExtraTrees
    TreeParams tree;
    std::uint64_t seed = 0;
};

class ForestModel {
public:
    ForestModel() = default;
    ForestModel(std::vector<DecisionTree> trees, ForestMode mode, std::size_t feature_subsample,
                std::uint64_t seed)
        : trees_(std::move(trees)), mode_(mode), feature_subsample_(feature_subsample), seed_(seed) {}

    /// Mean of the trees' probability vectors. Throws DimensionMismatch.
    std::vector<double> predict_proba(std::span<const float> x) const;
    std::uint32_t predict(std::span<const float> x) const { return argmax(predict_proba(x)); }

    const std::vector<DecisionTree>& trees() const { return trees_; }
    std::size_t n_trees() const { return trees_.size(); }
    ForestMode mode() const { return mode_; }
    std::size_t feature_subsample() const { return feature_subsample_; }
    std::uint64_t seed() const { return seed_; }
    std::uint32_t n_classes() const { return trees_.empty() ? 0 : trees_.front().n_classes(); }
    std::size_t n_features() const { return trees_.empty() ? 0 : trees_.front().n_features(); }

    bool operator==(const ForestModel&) const = default;

private:
    std::vector<DecisionTree> trees_;
    ForestMode mode_ = ForestMode::RandomForest;
    std::size_t feature_subsample_ = 0;
    std::uint64_t seed_ = 0;
};

/// Random forest / extra trees. Tree t draws all its randomness from
/// CounterRng(seed, t), so the result is independent of thread count.
/// Trees are grown in parallel with OpenMP.
///
/// Throws EmptyTrainingSet, LengthMismatch.
ForestModel fit_forest(const features::TensorBatch& x, std::span<const std::uint32_t> y, const ForestParams& params,
                       std::uint32_t n_classes = 0);
/// Single-threaded reference for fit_forest; produces an identical model.
ForestModel fit_forest_serial(const features::TensorBatch& x, std::span<const std::uint32_t> y,
                              const ForestParams& params, std::uint32_t n_classes = 0);

/// Probability rows for every sample; parallel over rows.
ProbabilityRows predict_forest_batch(const ForestModel& model, const features::TensorBatch& x);
ProbabilityRows predict_forest_batch_serial(const ForestModel& model, const features::TensorBatch& x);

} // namespace mtc::classic
