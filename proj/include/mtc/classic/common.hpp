#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mtc::classic {

/// Index of the largest probability; the lowest index wins ties.
inline std::uint32_t argmax(std::span<const double> probs) {
    std::uint32_t best = 0;
    for (std::uint32_t c = 1; c < probs.size(); ++c)
        if (probs[c] > probs[best]) best = c;
    return best;
}

/// One probability row per sample.
using ProbabilityRows = std::vector<std::vector<double>>;

inline std::vector<std::uint32_t> hard_labels(const ProbabilityRows& rows) {
    std::vector<std::uint32_t> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(argmax(r));
    return out;
}

/// max(y) + 1, or 0 for an empty label list.
inline std::uint32_t infer_class_count(std::span<const std::uint32_t> y) {
    std::uint32_t n = 0;
    for (auto v : y) n = v + 1 > n ? v + 1 : n;
    return n;
}

} // namespace mtc::classic
