#include "mtc/features/extractors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "mtc/common/error.hpp"

namespace mtc::features {

using capture::Direction;
using capture::Session;

namespace {

constexpr float kByteMax = 255.0f;

struct Moments {
    std::size_t n = 0;
    double sum = 0;
    double sum_sq = 0;
    double min = 0;
    double max = 0;

    void add(double v) {
        min = n == 0 ? v : std::min(min, v);
        max = n == 0 ? v : std::max(max, v);
        ++n;
        sum += v;
        sum_sq += v * v;
    }
    double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
    double stddev() const {
        if (n < 2) return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, sum_sq / static_cast<double>(n) - m * m));
    }
};

double shannon_entropy(std::span<const std::uint8_t> bytes) {
    std::array<std::size_t, 256> hist{};
    for (auto b : bytes) ++hist[b];
    double h = 0;
    const double n = static_cast<double>(bytes.size());
    for (auto c : hist) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

} // namespace

FeatureTensor extract_raw784(const Session& s) {
    if (s.total_payload_bytes < kRawBytes)
        throw InsufficientPayload("session has " + std::to_string(s.total_payload_bytes) +
                                  " payload bytes, 784 required");
    FeatureTensor t;
    t.repr.kind = ReprKind::Raw784;
    t.dims = {static_cast<std::uint32_t>(kRawBytes)};
    t.values.reserve(kRawBytes);
    for (const auto& sp : s.packets) {
        for (auto b : sp.packet.payload) {
            if (t.values.size() == kRawBytes) return t;
            t.values.push_back(static_cast<float>(b) / kByteMax);
        }
    }
    return t;
}

FeatureTensor extract_img28(const Session& s) {
    FeatureTensor t = extract_raw784(s);
    t.repr.kind = ReprKind::Img28;
    t.dims = {static_cast<std::uint32_t>(kImageSide), static_cast<std::uint32_t>(kImageSide)};
    return t;
}

FeatureTensor extract_deepmal(const Session& s, std::uint32_t m, std::uint32_t n) {
    if (m == 0 || n == 0) throw std::invalid_argument("deepmal m and n must be >= 1");
    FeatureTensor t;
    t.repr.kind = ReprKind::DeepMal;
    t.repr.deepmal_packets = m;
    t.repr.deepmal_bytes = n;
    t.dims = {m, n};
    t.values.assign(static_cast<std::size_t>(m) * n, 0.0f);
    const std::size_t rows = std::min<std::size_t>(m, s.packets.size());
    for (std::size_t k = 0; k < rows; ++k) {
        const auto& payload = s.packets[k].packet.payload;
        const std::size_t len = std::min<std::size_t>(n, payload.size());
        for (std::size_t j = 0; j < len; ++j) t.values[k * n + j] = static_cast<float>(payload[j]) / kByteMax;
    }
    return t;
}

FeatureTensor extract_pktseq(const Session& s, std::uint32_t p) {
    if (p == 0) throw std::invalid_argument("sequence length P must be >= 1");
    FeatureTensor t;
    t.repr.kind = ReprKind::PktSeq;
    t.repr.sequence_length = p;
    t.dims = {p, 3};
    t.values.assign(static_cast<std::size_t>(p) * 3, 0.0f);
    const std::size_t rows = std::min<std::size_t>(p, s.packets.size());
    for (std::size_t k = 0; k < rows; ++k) {
        const auto& sp = s.packets[k];
        t.values[k * 3 + 0] = static_cast<float>(sp.packet.payload.size());
        t.values[k * 3 + 1] = sp.direction == Direction::Forward ? 1.0f : -1.0f;
        if (k > 0) {
            const auto dt = sp.packet.timestamp_us - s.packets[k - 1].packet.timestamp_us;
            t.values[k * 3 + 2] = static_cast<float>(static_cast<double>(dt) * 1e-6);
        }
    }
    return t;
}

FeatureTensor extract_stats(const Session& s) {
    namespace slot = stats_slot;
    if (s.packets.empty()) throw std::invalid_argument("extract_stats needs a non-empty session");

    std::array<Moments, 2> sizes;
    std::array<Moments, 2> iats;
    std::array<std::uint64_t, 2> last_ts{};
    std::array<bool, 2> seen{};
    std::set<std::size_t> distinct;
    std::size_t syn = 0, fin_rst = 0;
    Moments entropy;
    std::uint64_t bytes = 0;

    for (const auto& sp : s.packets) {
        const auto d = static_cast<std::size_t>(sp.direction);
        const auto& p = sp.packet;
        sizes[d].add(static_cast<double>(p.payload.size()));
        if (seen[d]) iats[d].add(static_cast<double>(p.timestamp_us - last_ts[d]) * 1e-6);
        seen[d] = true;
        last_ts[d] = p.timestamp_us;
        distinct.insert(p.payload.size());
        bytes += p.payload.size();
        if (p.has_flag(capture::tcp_flag::SYN)) ++syn;
        if (p.has_flag(capture::tcp_flag::FIN)) ++fin_rst;
        if (p.has_flag(capture::tcp_flag::RST)) ++fin_rst;
        if (!p.payload.empty()) entropy.add(shannon_entropy(p.payload));
    }

    FeatureTensor t;
    t.repr.kind = ReprKind::Stats;
    t.dims = {static_cast<std::uint32_t>(kStatsSlots)};
    t.values.assign(kStatsSlots, 0.0f);
    for (std::size_t d = 0; d < 2; ++d) {
        const std::size_t base = d == 0 ? slot::kForward : slot::kBackward;
        t.values[base + slot::kCount] = static_cast<float>(sizes[d].n);
        t.values[base + slot::kBytes] = static_cast<float>(sizes[d].sum);
        t.values[base + slot::kSizeMin] = static_cast<float>(sizes[d].min);
        t.values[base + slot::kSizeMean] = static_cast<float>(sizes[d].mean());
        t.values[base + slot::kSizeMax] = static_cast<float>(sizes[d].max);
        t.values[base + slot::kSizeStd] = static_cast<float>(sizes[d].stddev());
        t.values[base + slot::kIatMean] = static_cast<float>(iats[d].mean());
        t.values[base + slot::kIatStd] = static_cast<float>(iats[d].stddev());
    }
    const double duration = static_cast<double>(s.last_timestamp_us() - s.first_timestamp_us()) * 1e-6;
    const double npk = static_cast<double>(s.packets.size());
    t.values[slot::kDuration] = static_cast<float>(duration);
    t.values[slot::kPacketsPerSecond] = duration > 0 ? static_cast<float>(npk / duration) : 0.0f;
    t.values[slot::kBytesPerSecond] = duration > 0 ? static_cast<float>(static_cast<double>(bytes) / duration) : 0.0f;
    t.values[slot::kForwardRatio] = static_cast<float>(static_cast<double>(sizes[0].n) / npk);
    t.values[slot::kSynCount] = static_cast<float>(syn);
    t.values[slot::kFinRstCount] = static_cast<float>(fin_rst);
    t.values[slot::kDistinctSizes] = static_cast<float>(distinct.size());
    t.values[slot::kMeanEntropy] = static_cast<float>(entropy.mean());
    return t;
}

FeatureTensor extract(const Session& s, const ReprSpec& repr) {
    FeatureTensor t;
    switch (repr.kind) {
    case ReprKind::Raw784: t = extract_raw784(s); break;
    case ReprKind::Img28: t = extract_img28(s); break;
    case ReprKind::DeepMal: t = extract_deepmal(s, repr.deepmal_packets, repr.deepmal_bytes); break;
    case ReprKind::PktSeq: t = extract_pktseq(s, repr.sequence_length); break;
    case ReprKind::Stats: t = extract_stats(s); break;
    }
    t.repr = repr;
    return t;
}

TensorBatch extract_batch(std::span<const dataset::LabeledSession> sessions, const ReprSpec& repr) {
    const std::size_t row = repr.row_size();
    const std::size_t n = sessions.size();
    std::vector<float> values(n * row);
    std::vector<std::string> errors(n);

#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < n; ++i) {
        try {
            const FeatureTensor t = extract(sessions[i].session, repr);
            std::copy(t.values.begin(), t.values.end(), values.begin() + static_cast<std::ptrdiff_t>(i * row));
        } catch (const std::exception& ex) {
            errors[i] = ex.what();
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!errors[i].empty()) throw InsufficientPayload("session " + std::to_string(i) + ": " + errors[i]);
    return TensorBatch(repr.dims(), std::move(values));
}

TensorBatch extract_batch_serial(std::span<const dataset::LabeledSession> sessions, const ReprSpec& repr) {
    TensorBatch out(repr.dims());
    for (const auto& ls : sessions) out.append(extract(ls.session, repr));
    return out;
}

} // namespace mtc::features
