#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "mtc/classic/forest.hpp"
#include "mtc/classic/knn.hpp"
#include "mtc/classic/tree.hpp"

namespace mtc::classic {

using ClassicModel = std::variant<DecisionTree, ForestModel, KnnModel>;

/// "MTCM" model dump, little endian:
///
///     "MTCM" | u16 version = 1 | u8 kind (0 tree, 1 forest, 2 knn)
///     tree:   u64 n_features | u32 n_classes | u32 node count | node*
///             node = u8 is_leaf, then i32 feature, f64 threshold, i32 left, i32 right
///                    or f64 probs[n_classes]
///     forest: u8 mode | u64 seed | u64 feature_subsample | u32 n_trees | tree*
///     knn:    u32 k | u32 n_classes | u8 rank | u32 dims[rank] | u64 n
///             | f32 x[n * prod(dims)] | u32 y[n]
std::vector<std::uint8_t> encode_model(const ClassicModel& model);
/// Throws CorruptModelFile.
ClassicModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const ClassicModel& model, const std::filesystem::path& path);
ClassicModel load_model(const std::filesystem::path& path);

} // namespace mtc::classic
