#include "mtc/classic/tree.hpp"

#include <algorithm>
#include <numeric>

#include "mtc/common/error.hpp"

namespace mtc::classic {

using features::TensorBatch;

std::span<const double> DecisionTree::predict_proba(std::span<const float> x) const {
    if (x.size() != n_features_)
        throw DimensionMismatch("tree expects " + std::to_string(n_features_) + " features, got " +
                                std::to_string(x.size()));
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(static_cast<double>(x[static_cast<std::size_t>(n.feature)]) <= n.threshold
                                         ? n.left
                                         : n.right);
    }
    return nodes_[i].probs;
}

std::size_t DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    // children always follow their parent in the flat array
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes_[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return best;
}

std::size_t DecisionTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace detail {

namespace {

/// sum over children of (sum of squared class counts / child size), kept as
/// an exact fraction so equal-gain splits compare equal
struct Score {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    static Score of(std::uint64_t sq_left, std::uint64_t nl, std::uint64_t sq_right, std::uint64_t nr) {
        return {sq_left * nr + sq_right * nl, nl * nr};
    }
    bool operator>(const Score& o) const {
        return static_cast<unsigned __int128>(num) * o.den > static_cast<unsigned __int128>(o.num) * den;
    }
};

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    Score score;
    bool found = false;
};

class Grower {
public:
    Grower(const TensorBatch& x, std::span<const std::uint32_t> y, std::uint32_t n_classes,
           std::vector<std::size_t> samples, const GrowOptions& opts, CounterRng& rng)
        : x_(x), y_(y), n_classes_(n_classes), samples_(std::move(samples)), opts_(opts), rng_(rng),
          d_(x.row_size()) {
        feature_order_.resize(d_);
        counts_.resize(n_classes_);
        left_.resize(n_classes_);
        right_.resize(n_classes_);
    }

    DecisionTree run() {
        build(0, samples_.size(), 0);
        return DecisionTree(std::move(nodes_), d_, n_classes_);
    }

private:
    float value(std::size_t sample, std::size_t feature) const { return x_.row(sample)[feature]; }

    std::int32_t make_leaf(std::span<const std::uint64_t> counts, std::size_t m) {
        TreeNode leaf;
        leaf.probs.resize(n_classes_);
        for (std::uint32_t c = 0; c < n_classes_; ++c)
            leaf.probs[c] = static_cast<double>(counts[c]) / static_cast<double>(m);
        nodes_.push_back(std::move(leaf));
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    bool is_constant(std::size_t lo, std::size_t hi, std::size_t f, float& mn, float& mx) const {
        mn = mx = value(samples_[lo], f);
        for (std::size_t i = lo + 1; i < hi; ++i) {
            const float v = value(samples_[i], f);
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        return !(mn < mx);
    }

    /// Non-constant candidate features for this node, ascending.
    std::vector<std::size_t> candidate_features(std::size_t lo, std::size_t hi, std::vector<std::pair<float, float>>& ranges) {
        std::vector<std::size_t> out;
        const std::size_t want = opts_.features_per_split;
        const bool all = want == 0 || want >= d_;
        if (!all) {
            std::iota(feature_order_.begin(), feature_order_.end(), std::size_t{0});
            shuffle(std::span<std::size_t>(feature_order_), rng_);
        }
        std::vector<std::pair<std::size_t, std::pair<float, float>>> picked;
        for (std::size_t k = 0; k < d_; ++k) {
            const std::size_t f = all ? k : feature_order_[k];
            float mn, mx;
            if (is_constant(lo, hi, f, mn, mx)) continue;
            picked.push_back({f, {mn, mx}});
            if (!all && picked.size() == want) break;
        }
        std::sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [f, r] : picked) {
            out.push_back(f);
            ranges.push_back(r);
        }
        return out;
    }

    void best_threshold(std::size_t lo, std::size_t hi, std::size_t f, Split& best) {
        const std::size_t m = hi - lo;
        pairs_.clear();
        for (std::size_t i = lo; i < hi; ++i) pairs_.emplace_back(value(samples_[i], f), y_[samples_[i]]);
        std::sort(pairs_.begin(), pairs_.end());

        std::fill(left_.begin(), left_.end(), 0);
        right_ = counts_;
        std::uint64_t sq_left = 0;
        std::uint64_t sq_right = 0;
        for (auto c : counts_) sq_right += c * c;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            const auto c = pairs_[i].second;
            sq_left += 2 * left_[c] + 1;
            sq_right -= 2 * right_[c] - 1;
            ++left_[c];
            --right_[c];
            if (!(pairs_[i].first < pairs_[i + 1].first)) continue;
            const auto score = Score::of(sq_left, i + 1, sq_right, m - i - 1);
            if (!best.found || score > best.score) {
                best.found = true;
                best.score = score;
                best.feature = f;
                best.threshold = (static_cast<double>(pairs_[i].first) + static_cast<double>(pairs_[i + 1].first)) / 2.0;
            }
        }
    }

    void random_threshold(std::size_t lo, std::size_t hi, std::size_t f, float mn, float mx, Split& best) {
        const double t = static_cast<double>(mn) + rng_.uniform() * (static_cast<double>(mx) - static_cast<double>(mn));
        std::fill(left_.begin(), left_.end(), 0);
        std::size_t nl = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            if (static_cast<double>(value(samples_[i], f)) <= t) {
                ++left_[y_[samples_[i]]];
                ++nl;
            }
        }
        const std::size_t m = hi - lo;
        if (nl == 0 || nl == m) return;
        std::uint64_t sq_left = 0, sq_right = 0;
        for (std::uint32_t c = 0; c < n_classes_; ++c) {
            sq_left += left_[c] * left_[c];
            const auto r = counts_[c] - left_[c];
            sq_right += r * r;
        }
        const auto score = Score::of(sq_left, nl, sq_right, m - nl);
        if (!best.found || score > best.score) {
            best.found = true;
            best.score = score;
            best.feature = f;
            best.threshold = t;
        }
    }

    std::int32_t build(std::size_t lo, std::size_t hi, std::size_t depth) {
        const std::size_t m = hi - lo;
        std::fill(counts_.begin(), counts_.end(), 0);
        for (std::size_t i = lo; i < hi; ++i) ++counts_[y_[samples_[i]]];
        const bool pure = std::count_if(counts_.begin(), counts_.end(), [](auto c) { return c > 0; }) <= 1;
        const bool depth_limit = opts_.tree.max_depth && depth >= *opts_.tree.max_depth;
        if (pure || m < opts_.tree.min_samples_split || m < 2 || depth_limit) return make_leaf(counts_, m);

        std::vector<std::pair<float, float>> ranges;
        const auto feats = candidate_features(lo, hi, ranges);
        Split best;
        for (std::size_t k = 0; k < feats.size(); ++k) {
            if (opts_.rule == SplitRule::Best) best_threshold(lo, hi, feats[k], best);
            else random_threshold(lo, hi, feats[k], ranges[k].first, ranges[k].second, best);
        }

        // zero-gain splits are still taken: an impure node with a usable
        // feature never becomes a leaf, so consistent data is fit exactly
        if (!best.found) return make_leaf(counts_, m);

        const auto mid_it = std::stable_partition(
            samples_.begin() + static_cast<std::ptrdiff_t>(lo), samples_.begin() + static_cast<std::ptrdiff_t>(hi),
            [&](std::size_t s) { return static_cast<double>(value(s, best.feature)) <= best.threshold; });
        const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());

        nodes_.push_back(TreeNode{static_cast<std::int32_t>(best.feature), best.threshold, -1, -1, {}});
        const auto self = nodes_.size() - 1;
        const auto left = build(lo, mid, depth + 1);
        const auto right = build(mid, hi, depth + 1);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return static_cast<std::int32_t>(self);
    }

    const TensorBatch& x_;
    std::span<const std::uint32_t> y_;
    std::uint32_t n_classes_;
    std::vector<std::size_t> samples_;
    const GrowOptions& opts_;
    CounterRng& rng_;
    std::size_t d_;

    std::vector<TreeNode> nodes_;
    std::vector<std::size_t> feature_order_;
    std::vector<std::pair<float, std::uint32_t>> pairs_;
    std::vector<std::uint64_t> counts_, left_, right_;
};

} // namespace

DecisionTree grow_tree(const TensorBatch& x, std::span<const std::uint32_t> y, std::uint32_t n_classes,
                       std::vector<std::size_t> samples, const GrowOptions& opts, CounterRng& rng) {
    if (samples.empty()) throw EmptyTrainingSet("cannot grow a tree on zero samples");
    return Grower(x, y, n_classes, std::move(samples), opts, rng).run();
}

} // namespace detail

DecisionTree fit_tree(const TensorBatch& x, std::span<const std::uint32_t> y, const TreeParams& params,
                      std::uint32_t n_classes) {
    if (x.count() == 0 || y.empty()) throw EmptyTrainingSet("decision tree needs at least one sample");
    if (x.count() != y.size()) throw LengthMismatch("feature rows and labels differ in length");
    if (n_classes == 0) n_classes = infer_class_count(y);
    for (auto v : y)
        if (v >= n_classes) throw UnknownLabel("label " + std::to_string(v) + " out of class range");
    std::vector<std::size_t> samples(x.count());
    std::iota(samples.begin(), samples.end(), std::size_t{0});
    CounterRng unused(0);
    return detail::grow_tree(x, y, n_classes, std::move(samples), {params, detail::SplitRule::Best, 0}, unused);
}

} // namespace mtc::classic
