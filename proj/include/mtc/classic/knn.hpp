#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mtc/classic/common.hpp"
#include "mtc/features/tensor.hpp"

namespace mtc::classic {

/// Brute-force k-nearest-neighbours under Euclidean distance.
class KnnModel {
public:
    KnnModel() = default;
    /// Throws EmptyTrainingSet, LengthMismatch; std::invalid_argument when
    /// k is 0 or exceeds the training size.
    KnnModel(features::TensorBatch x, std::vector<std::uint32_t> y, std::uint32_t k = 3, std::uint32_t n_classes = 0);

    /// Label frequencies among the k nearest training points. Distance ties
    /// go to the lower training index. Throws DimensionMismatch.
    std::vector<double> predict_proba(std::span<const float> x) const;
    std::uint32_t predict(std::span<const float> x) const { return argmax(predict_proba(x)); }

    const features::TensorBatch& train_x() const { return x_; }
    const std::vector<std::uint32_t>& train_y() const { return y_; }
    std::uint32_t k() const { return k_; }
    std::uint32_t n_classes() const { return n_classes_; }

    bool operator==(const KnnModel&) const = default;

private:
    features::TensorBatch x_;
    std::vector<std::uint32_t> y_;
    std::uint32_t k_ = 3;
    std::uint32_t n_classes_ = 0;
};

/// Squared Euclidean distance accumulated in double, left to right.
double squared_distance(std::span<const float> a, std::span<const float> b);

/// OpenMP-parallel over queries.
ProbabilityRows knn_predict_batch(const KnnModel& model, const features::TensorBatch& queries);
ProbabilityRows knn_predict_batch_serial(const KnnModel& model, const features::TensorBatch& queries);

} // namespace mtc::classic
