#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mtc/classic/common.hpp"
#include "mtc/common/rng.hpp"
#include "mtc/features/tensor.hpp"

namespace mtc::classic {

/// Flat-array tree node. A split sends x left iff x[feature] <= threshold.
struct TreeNode {
    std::int32_t feature = -1; ///< -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::vector<double> probs; ///< leaves only; sums to 1

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
public:
    DecisionTree() = default;
    DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features, std::uint32_t n_classes)
        : nodes_(std::move(nodes)), n_features_(n_features), n_classes_(n_classes) {}

    /// Throws DimensionMismatch.
    std::span<const double> predict_proba(std::span<const float> x) const;
    std::uint32_t predict(std::span<const float> x) const { return argmax(predict_proba(x)); }

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t n_features() const { return n_features_; }
    std::uint32_t n_classes() const { return n_classes_; }
    std::size_t depth() const;
    std::size_t leaf_count() const;

    bool operator==(const DecisionTree&) const = default;

private:
    std::vector<TreeNode> nodes_; ///< nodes_[0] is the root
    std::size_t n_features_ = 0;
    std::uint32_t n_classes_ = 0;
};

struct TreeParams {
    std::optional<std::size_t> max_depth;
    std::size_t min_samples_split = 2;
};

/// CART with Gini impurity. Candidate thresholds are midpoints between
/// consecutive distinct values; among equal-gain splits the lowest feature
/// index, then the lowest threshold, wins. A node becomes a leaf when pure,
/// smaller than min_samples_split, at max_depth, or when every feature is
/// constant over it; a zero-gain split is still taken. `n_classes` = 0
/// infers max(y) + 1.
///
/// Throws EmptyTrainingSet, LengthMismatch.
DecisionTree fit_tree(const features::TensorBatch& x, std::span<const std::uint32_t> y,
                      const TreeParams& params = {}, std::uint32_t n_classes = 0);

namespace detail {

enum class SplitRule : std::uint8_t { Best, RandomThreshold };

/// Shared tree grower used by fit_tree and the forests.
struct GrowOptions {
    TreeParams tree;
    SplitRule rule = SplitRule::Best;
    std::size_t features_per_split = 0; ///< 0 or >= d: every feature
};

DecisionTree grow_tree(const features::TensorBatch& x, std::span<const std::uint32_t> y, std::uint32_t n_classes,
                       std::vector<std::size_t> samples, const GrowOptions& opts, CounterRng& rng);

} // namespace detail

} // namespace mtc::classic
