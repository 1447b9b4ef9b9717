#pragma once

// Deliberately naive reference computations used to check the library.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "mtc/features/tensor.hpp"

namespace mtc::oracle {

/// Exact fraction with a positive denominator.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational of(std::int64_t n, std::int64_t d) {
        if (d == 0) return {0, 1};
        const auto g = std::gcd(n, d);
        return {n / g, d / g};
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    Rational operator+(const Rational& o) const { return of(num * o.den + o.num * den, den * o.den); }
    Rational operator*(const Rational& o) const { return of(num * o.num, den * o.den); }
    Rational operator/(const Rational& o) const { return o.num == 0 ? Rational{} : of(num * o.den, den * o.num); }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

struct ClassTally {
    Rational precision, recall, f1, accuracy;
};

/// Per-class scores counted straight from the label lists.
inline std::vector<ClassTally> tally(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred,
                                     std::uint32_t n_classes) {
    std::vector<ClassTally> out(n_classes);
    const auto total = static_cast<std::int64_t>(truth.size());
    for (std::uint32_t c = 0; c < n_classes; ++c) {
        std::int64_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            tp += truth[i] == c && pred[i] == c;
            fp += truth[i] != c && pred[i] == c;
            fn += truth[i] == c && pred[i] != c;
        }
        auto& t = out[c];
        t.precision = Rational::of(tp, tp + fp);
        t.recall = Rational::of(tp, tp + fn);
        const auto sum = t.precision + t.recall;
        t.f1 = sum.num == 0 ? Rational{} : Rational{2, 1} * t.precision * t.recall / sum;
        t.accuracy = Rational::of(total - fp - fn, total);
    }
    return out;
}

/// Sorts every training point by (distance, index) and counts the first k labels.
inline std::vector<double> knn_proba(const features::TensorBatch& train, std::span<const std::uint32_t> y,
                                     std::span<const float> q, std::uint32_t k, std::uint32_t n_classes) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < train.count(); ++i) {
        double s = 0;
        const auto r = train.row(i);
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double diff = static_cast<double>(r[j]) - static_cast<double>(q[j]);
            s += diff * diff;
        }
        d.emplace_back(s, i);
    }
    std::sort(d.begin(), d.end());
    std::vector<std::uint32_t> votes(n_classes, 0);
    for (std::uint32_t i = 0; i < k; ++i) ++votes[y[d[i].second]];
    std::vector<double> p(n_classes);
    for (std::uint32_t c = 0; c < n_classes; ++c) p[c] = static_cast<double>(votes[c]) / k;
    return p;
}

struct RootSplit {
    std::size_t feature = 0;
    double threshold = 0;
};

/// Best Gini split over every feature and every midpoint, compared as exact
/// fractions of the weighted child impurity; first found wins ties. Empty
/// when every feature is constant.
inline std::optional<RootSplit> best_root_split(const features::TensorBatch& x, std::span<const std::uint32_t> y,
                                                std::uint32_t n_classes) {
    const std::size_t n = x.count();
    // child cost = n_c - sum(cnt^2)/n_c; total cost compared as num/den
    auto cost = [&](std::size_t f, double t, __int128& num, __int128& den) {
        std::vector<std::int64_t> l(n_classes, 0), r(n_classes, 0);
        std::int64_t nl = 0, nr = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<double>(x.row(i)[f]) <= t) {
                ++l[y[i]];
                ++nl;
            } else {
                ++r[y[i]];
                ++nr;
            }
        }
        std::int64_t sl = 0, sr = 0;
        for (std::uint32_t c = 0; c < n_classes; ++c) {
            sl += l[c] * l[c];
            sr += r[c] * r[c];
        }
        if (nl == 0 || nr == 0) return false;
        num = static_cast<__int128>(nl * nl - sl) * nr + static_cast<__int128>(nr * nr - sr) * nl;
        den = static_cast<__int128>(nl) * nr;
        return true;
    };
    __int128 best_num = 0, best_den = 1;
    std::optional<RootSplit> best;
    for (std::size_t f = 0; f < x.row_size(); ++f) {
        std::vector<float> vals;
        for (std::size_t i = 0; i < n; ++i) vals.push_back(x.row(i)[f]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
            const double t = (static_cast<double>(vals[k]) + static_cast<double>(vals[k + 1])) / 2.0;
            __int128 num, den;
            if (!cost(f, t, num, den)) continue;
            if (!best || num * best_den < best_num * den) {
                best_num = num;
                best_den = den;
                best = RootSplit{f, t};
            }
        }
    }
    return best;
}

} // namespace mtc::oracle
