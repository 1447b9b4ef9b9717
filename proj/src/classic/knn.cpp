#include "mtc/classic/knn.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mtc/common/error.hpp"

namespace mtc::classic {

KnnModel::KnnModel(features::TensorBatch x, std::vector<std::uint32_t> y, std::uint32_t k, std::uint32_t n_classes)
    : x_(std::move(x)), y_(std::move(y)), k_(k) {
    if (x_.count() == 0 || y_.empty()) throw EmptyTrainingSet("knn needs at least one training point");
    if (x_.count() != y_.size()) throw LengthMismatch("feature rows and labels differ in length");
    if (k_ == 0 || k_ > y_.size()) throw std::invalid_argument("knn k must satisfy 1 <= k <= training size");
    n_classes_ = n_classes == 0 ? infer_class_count(y_) : n_classes;
    for (auto v : y_)
        if (v >= n_classes_) throw UnknownLabel("label " + std::to_string(v) + " out of class range");
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

std::vector<double> KnnModel::predict_proba(std::span<const float> x) const {
    if (x.size() != x_.row_size())
        throw DimensionMismatch("knn expects " + std::to_string(x_.row_size()) + " features, got " +
                                std::to_string(x.size()));
    const std::size_t n = x_.count();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = {squared_distance(x, x_.row(i)), i};
    // pair ordering gives the lower-index tie-break
    std::partial_sort(dist.begin(), dist.begin() + k_, dist.end());
    std::vector<double> probs(n_classes_, 0.0);
    for (std::uint32_t j = 0; j < k_; ++j) probs[y_[dist[j].second]] += 1.0;
    for (auto& p : probs) p /= static_cast<double>(k_);
    return probs;
}

ProbabilityRows knn_predict_batch(const KnnModel& model, const features::TensorBatch& queries) {
    ProbabilityRows out(queries.count());
    std::string error;
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < queries.count(); ++i) {
        try {
            out[i] = model.predict_proba(queries.row(i));
        } catch (const std::exception& ex) {
#pragma omp critical
            error = ex.what();
        }
    }
    if (!error.empty()) throw DimensionMismatch(error);
    return out;
}

ProbabilityRows knn_predict_batch_serial(const KnnModel& model, const features::TensorBatch& queries) {
    ProbabilityRows out;
    out.reserve(queries.count());
    for (std::size_t i = 0; i < queries.count(); ++i) out.push_back(model.predict_proba(queries.row(i)));
    return out;
}

} // namespace mtc::classic
