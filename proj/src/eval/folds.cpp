#include "mtc/eval/folds.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

#include "mtc/common/error.hpp"
#include "mtc/common/rng.hpp"

namespace mtc::eval {

std::vector<std::size_t> FoldAssignment::train_indices(std::uint32_t fold) const {
    std::vector<std::size_t> out;
    for (std::uint32_t f = 0; f < k; ++f)
        if (f != fold) out.insert(out.end(), folds[f].begin(), folds[f].end());
    std::sort(out.begin(), out.end());
    return out;
}

FoldAssignment stratified_kfold(std::span<const std::uint32_t> labels, std::uint32_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("k-fold needs k >= 2");
    std::map<std::uint32_t, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (const auto& [c, members] : by_class)
        if (members.size() < k)
            throw ClassTooSmall("class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                                " samples, fewer than k = " + std::to_string(k));

    FoldAssignment fa;
    fa.k = k;
    fa.folds.resize(k);
    std::size_t next = 0;
    for (auto& [c, members] : by_class) {
        CounterRng rng(seed, 0xf01d0000ULL + c);
        shuffle(std::span<std::size_t>(members), rng);
        for (auto idx : members) {
            fa.folds[next].push_back(idx);
            next = (next + 1) % k;
        }
    }
    for (auto& f : fa.folds) std::sort(f.begin(), f.end());
    return fa;
}

} // namespace mtc::eval
