#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mtc::eval {

/// counts[i][j] = samples of true class i predicted as class j.
struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<std::vector<std::uint64_t>> counts;

    explicit ConfusionMatrix(std::vector<std::string> class_names = {});

    std::uint64_t total() const;
    std::uint64_t trace() const;
    std::uint64_t row_sum(std::size_t i) const;
    std::uint64_t col_sum(std::size_t j) const;
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);

    bool operator==(const ConfusionMatrix&) const = default;
};

/// One-vs-rest scores of a single class. Precision (recall) is 0 when the
/// class was never predicted (never present); F1 is 0 when both are 0.
struct ClassMetrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double accuracy = 0; ///< (TP + TN) / total for this class against the rest
    std::uint64_t support = 0;
};

struct MetricsReport {
    double accuracy = 0; ///< trace / total
    std::vector<ClassMetrics> per_class;
    double macro_precision = 0;
    double macro_recall = 0;
    double macro_f1 = 0;
    ConfusionMatrix confusion{};
    int fold = -1; ///< -1 for aggregate reports
};

/// Labels are indices into `classes`. Throws LengthMismatch, UnknownLabel.
MetricsReport compute_metrics(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted,
                              std::span<const std::string> classes);

/// Scores derived from an existing confusion matrix.
MetricsReport metrics_from_confusion(const ConfusionMatrix& cm);

/// Unweighted mean of every scalar over the folds; confusion counts are summed.
MetricsReport mean_report(std::span<const MetricsReport> folds);

} // namespace mtc::eval
