#include "mtc/eval/metrics.hpp"

#include <string>

#include "mtc/common/error.hpp"

namespace mtc::eval {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names)
    : classes(std::move(class_names)),
      counts(classes.size(), std::vector<std::uint64_t>(classes.size(), 0)) {}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (const auto& r : counts)
        for (auto c : r) t += c;
    return t;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
    return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t i) const {
    std::uint64_t t = 0;
    for (auto c : counts[i]) t += c;
    return t;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t j) const {
    std::uint64_t t = 0;
    for (const auto& r : counts) t += r[j];
    return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (other.classes != classes) throw Error("cannot add confusion matrices over different classes");
    for (std::size_t i = 0; i < counts.size(); ++i)
        for (std::size_t j = 0; j < counts.size(); ++j) counts[i][j] += other.counts[i][j];
    return *this;
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm) {
    MetricsReport rep;
    rep.confusion = cm;
    const std::size_t n = cm.classes.size();
    const std::uint64_t total = cm.total();
    rep.accuracy = total == 0 ? 0.0 : static_cast<double>(cm.trace()) / static_cast<double>(total);
    rep.per_class.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::uint64_t tp = cm.counts[c][c];
        const std::uint64_t fn = cm.row_sum(c) - tp;
        const std::uint64_t fp = cm.col_sum(c) - tp;
        const std::uint64_t tn = total - tp - fn - fp;
        auto& m = rep.per_class[c];
        m.support = tp + fn;
        m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        // harmonic mean of precision and recall, in one rounding
        m.f1 = tp == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
        m.accuracy = total == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total);
        rep.macro_precision += m.precision;
        rep.macro_recall += m.recall;
        rep.macro_f1 += m.f1;
    }
    if (n > 0) {
        rep.macro_precision /= static_cast<double>(n);
        rep.macro_recall /= static_cast<double>(n);
        rep.macro_f1 /= static_cast<double>(n);
    }
    return rep;
}

MetricsReport compute_metrics(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> predicted,
                              std::span<const std::string> classes) {
    if (truth.size() != predicted.size())
        throw LengthMismatch("truth has " + std::to_string(truth.size()) + " labels, predictions " +
                             std::to_string(predicted.size()));
    ConfusionMatrix cm({classes.begin(), classes.end()});
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= classes.size() || predicted[i] >= classes.size())
            throw UnknownLabel("label index outside the class list at position " + std::to_string(i));
        ++cm.counts[truth[i]][predicted[i]];
    }
    return metrics_from_confusion(cm);
}

MetricsReport mean_report(std::span<const MetricsReport> folds) {
    if (folds.empty()) return MetricsReport{};
    MetricsReport out;
    out.confusion = ConfusionMatrix(folds.front().confusion.classes);
    out.per_class.resize(folds.front().per_class.size());
    const double k = static_cast<double>(folds.size());
    for (const auto& f : folds) {
        out.confusion += f.confusion;
        out.accuracy += f.accuracy / k;
        out.macro_precision += f.macro_precision / k;
        out.macro_recall += f.macro_recall / k;
        out.macro_f1 += f.macro_f1 / k;
        for (std::size_t c = 0; c < out.per_class.size(); ++c) {
            out.per_class[c].precision += f.per_class[c].precision / k;
            out.per_class[c].recall += f.per_class[c].recall / k;
            out.per_class[c].f1 += f.per_class[c].f1 / k;
            out.per_class[c].accuracy += f.per_class[c].accuracy / k;
            out.per_class[c].support += f.per_class[c].support;
        }
    }
    return out;
}

} // namespace mtc::eval
