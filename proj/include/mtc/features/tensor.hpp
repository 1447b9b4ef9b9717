#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mtc::features {

enum class ReprKind : std::uint8_t { Raw784, Img28, DeepMal, PktSeq, Stats };

inline constexpr std::size_t kRawBytes = 784;
inline constexpr std::size_t kImageSide = 28;
inline constexpr std::size_t kStatsSlots = 24;

/// A representation tag plus its extractor parameters.
struct ReprSpec {
    ReprKind kind = ReprKind::Raw784;
    std::uint32_t deepmal_packets = 2;    ///< m: leading packets used by DEEPMAL
    std::uint32_t deepmal_bytes = 100;    ///< n: payload bytes kept per packet
    std::uint32_t sequence_length = 32;   ///< P: rows of the packet-sequence matrix

    std::vector<std::uint32_t> dims() const;
    std::size_t row_size() const;
    /// "raw784", "img28", "deepmal", "pktseq" or "stats".
    std::string name() const;
    /// Throws std::invalid_argument on unknown names or non-positive parameters.
    static ReprSpec parse(const std::string& name, std::uint32_t m = 2, std::uint32_t n = 100,
                          std::uint32_t p = 32);

    bool operator==(const ReprSpec&) const = default;
};

struct FeatureTensor {
    ReprSpec repr;
    std::vector<std::uint32_t> dims;
    std::vector<float> values; ///< row-major

    float at(std::size_t i, std::size_t j) const { return values[i * dims.back() + j]; }
};

/// Many tensors of identical shape stored back to back: the feature matrix
/// handed to models (one row per sample).
class TensorBatch {
public:
    TensorBatch() = default;
    explicit TensorBatch(std::vector<std::uint32_t> dims);
    TensorBatch(std::vector<std::uint32_t> dims, std::vector<float> values);

    /// Throws ShapeMismatch if the tensor's dims differ.
    void append(const FeatureTensor& t);
    void append_row(std::span<const float> row);

    const std::vector<std::uint32_t>& dims() const { return dims_; }
    std::size_t row_size() const { return row_size_; }
    std::size_t count() const { return row_size_ == 0 ? 0 : values_.size() / row_size_; }
    std::span<const float> row(std::size_t i) const { return {values_.data() + i * row_size_, row_size_}; }
    const std::vector<float>& values() const { return values_; }

    /// Rows picked by index, in the given order.
    TensorBatch select(std::span<const std::size_t> rows) const;

    bool operator==(const TensorBatch&) const = default;

private:
    std::vector<std::uint32_t> dims_;
    std::size_t row_size_ = 0;
    std::vector<float> values_;
};

} // namespace mtc::features
