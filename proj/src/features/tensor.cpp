#include "mtc/features/tensor.hpp"

#include <functional>
#include <numeric>
#include <stdexcept>

#include "mtc/common/error.hpp"

namespace mtc::features {

namespace {

std::size_t product(const std::vector<std::uint32_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

} // namespace

std::vector<std::uint32_t> ReprSpec::dims() const {
    switch (kind) {
    case ReprKind::Raw784: return {static_cast<std::uint32_t>(kRawBytes)};
    case ReprKind::Img28: return {static_cast<std::uint32_t>(kImageSide), static_cast<std::uint32_t>(kImageSide)};
    case ReprKind::DeepMal: return {deepmal_packets, deepmal_bytes};
    case ReprKind::PktSeq: return {sequence_length, 3};
    case ReprKind::Stats: return {static_cast<std::uint32_t>(kStatsSlots)};
    }
    return {};
}

std::size_t ReprSpec::row_size() const { return product(dims()); }

std::string ReprSpec::name() const {
    switch (kind) {
    case ReprKind::Raw784: return "raw784";
    case ReprKind::Img28: return "img28";
    case ReprKind::DeepMal: return "deepmal";
    case ReprKind::PktSeq: return "pktseq";
    case ReprKind::Stats: return "stats";
    }
    return "?";
}

ReprSpec ReprSpec::parse(const std::string& name, std::uint32_t m, std::uint32_t n, std::uint32_t p) {
    if (m == 0 || n == 0 || p == 0) throw std::invalid_argument("extractor parameters m, n, P must be >= 1");
    ReprSpec r;
    r.deepmal_packets = m;
    r.deepmal_bytes = n;
    r.sequence_length = p;
    if (name == "raw784") r.kind = ReprKind::Raw784;
    else if (name == "img28") r.kind = ReprKind::Img28;
    else if (name == "deepmal") r.kind = ReprKind::DeepMal;
    else if (name == "pktseq") r.kind = ReprKind::PktSeq;
    else if (name == "stats") r.kind = ReprKind::Stats;
    else throw std::invalid_argument("unknown representation '" + name + "'");
    return r;
}

TensorBatch::TensorBatch(std::vector<std::uint32_t> dims) : dims_(std::move(dims)), row_size_(product(dims_)) {
    if (dims_.empty() || dims_.size() > 3) throw ShapeMismatch("tensor rank must be 1..3");
    for (auto d : dims_)
        if (d == 0) throw ShapeMismatch("tensor dimensions must be positive");
}

TensorBatch::TensorBatch(std::vector<std::uint32_t> dims, std::vector<float> values)
    : TensorBatch(std::move(dims)) {
    if (values.size() % row_size_ != 0) throw ShapeMismatch("value count is not a multiple of the row size");
    values_ = std::move(values);
}

void TensorBatch::append(const FeatureTensor& t) {
    if (t.dims != dims_) throw ShapeMismatch("tensor dims differ from batch dims");
    append_row(t.values);
}

void TensorBatch::append_row(std::span<const float> row) {
    if (row.size() != row_size_) throw ShapeMismatch("row size differs from batch row size");
    values_.insert(values_.end(), row.begin(), row.end());
}

TensorBatch TensorBatch::select(std::span<const std::size_t> rows) const {
    TensorBatch out(dims_);
    out.values_.reserve(rows.size() * row_size_);
    for (auto r : rows) {
        if (r >= count()) throw std::out_of_range("row index out of range");
        auto src = row(r);
        out.values_.insert(out.values_.end(), src.begin(), src.end());
    }
    return out;
}

} // namespace mtc::features
