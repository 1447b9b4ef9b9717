#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mtc::eval {

struct FoldAssignment {
    std::uint32_t k = 0;
    std::vector<std::vector<std::size_t>> folds; ///< sample indices per fold, ascending

    std::vector<std::size_t> test_indices(std::uint32_t fold) const { return folds.at(fold); }
    std::vector<std::size_t> train_indices(std::uint32_t fold) const;

    bool operator==(const FoldAssignment&) const = default;
};

/// Shuffles each class (seeded, one stream per class) and deals its members
/// round-robin over the folds; each class continues where the previous one
/// stopped so fold sizes stay within one of each other. Classes are
/// processed in ascending label order.
///
/// Throws ClassTooSmall when a present class has fewer than k members;
/// std::invalid_argument when k < 2.
FoldAssignment stratified_kfold(std::span<const std::uint32_t> labels, std::uint32_t k, std::uint64_t seed);

} // namespace mtc::eval
