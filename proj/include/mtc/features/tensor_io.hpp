#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mtc/features/tensor.hpp"

namespace mtc::features {

/// "FTNS" tensor file, little endian:
///
///     magic "FTNS" | u16 version = 1 | u8 dtype = 1 (float32) | u8 rank
///     | u32 dims[rank] | u64 count | float32 values[count * prod(dims)]
std::vector<std::uint8_t> encode_tensor_file(const TensorBatch& batch);
/// Throws CorruptTensorFile.
TensorBatch decode_tensor_file(std::span<const std::uint8_t> bytes);

void write_tensor_file(const TensorBatch& batch, const std::filesystem::path& path);
TensorBatch read_tensor_file(const std::filesystem::path& path);

/// Builds a batch from individual tensors. Throws ShapeMismatch unless all
/// share dims and representation; an empty list needs `dims_if_empty`.
TensorBatch stack_tensors(std::span<const FeatureTensor> tensors,
                          const std::vector<std::uint32_t>& dims_if_empty = {});

/// One line "session_id,label,family" of the companion label file. `label`
/// is the integer class index of the task the file was written for.
struct LabelRow {
    std::string session_id;
    std::uint32_t label = 0;
    std::string family;

    bool operator==(const LabelRow&) const = default;
};

void write_label_file(std::span<const LabelRow> rows, const std::filesystem::path& path);
/// Throws CorruptTensorFile on malformed lines.
std::vector<LabelRow> read_label_file(const std::filesystem::path& path);

} // namespace mtc::features
