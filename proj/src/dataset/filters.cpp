#include "mtc/dataset/filters.hpp"

#include <map>
#include <stdexcept>

#include "mtc/common/error.hpp"
#include "mtc/common/rng.hpp"

namespace mtc::dataset {

LabeledCorpus filter_min_payload(const LabeledCorpus& corpus, std::uint64_t threshold) {
    if (threshold == 0) throw std::invalid_argument("min-payload threshold must be positive");
    LabeledCorpus out{corpus.dataset_name, {}};
    for (const auto& s : corpus.sessions)
        if (s.session.total_payload_bytes >= threshold) out.sessions.push_back(s);
    return out;
}

bool NoiseRule::matches(const capture::Session& s) const {
    if (broadcast) {
        for (const auto& sp : s.packets)
            if (sp.packet.ip_dst.is_broadcast_or_multicast()) return true;
        return false;
    }
    if (transport && *transport != s.key.transport) return false;
    const auto in_range = [&](std::uint16_t p) { return p >= port_lo && p <= port_hi; };
    return in_range(s.key.a.port) || in_range(s.key.b.port);
}

std::vector<NoiseRule> default_denylist() {
    using capture::Transport;
    return {
        {"dns", std::nullopt, 53, 53, false},
        {"snmp", Transport::UDP, 161, 162, false},
        {"llmnr", Transport::UDP, 5355, 5355, false},
        {"netbios", Transport::UDP, 137, 138, false},
        {"ssdp", Transport::UDP, 1900, 1900, false},
        {"dhcp", Transport::UDP, 67, 68, false},
        {"broadcast", std::nullopt, 0, 0, true},
    };
}

NoiseFilterResult filter_noise(const LabeledCorpus& corpus, const std::vector<NoiseRule>& denylist) {
    if (denylist.empty()) throw std::invalid_argument("noise denylist must not be empty");
    NoiseFilterResult res;
    res.corpus.dataset_name = corpus.dataset_name;
    for (const auto& r : denylist) res.removed.emplace_back(r.name, 0);
    for (const auto& s : corpus.sessions) {
        bool drop = false;
        for (std::size_t r = 0; r < denylist.size() && !drop; ++r) {
            if (denylist[r].matches(s.session)) {
                ++res.removed[r].second;
                drop = true;
            }
        }
        if (!drop) res.corpus.sessions.push_back(s);
    }
    return res;
}

LabeledCorpus balance_benign_malware(const LabeledCorpus& corpus, std::uint64_t seed) {
    std::vector<std::size_t> benign, malware;
    for (std::size_t i = 0; i < corpus.sessions.size(); ++i)
        (corpus.sessions[i].label == Label::Benign ? benign : malware).push_back(i);
    if (benign.empty() || malware.empty())
        throw OneClassOnly("balancing needs both benign and malware sessions");
    if (benign.size() == malware.size()) return corpus;

    auto& majority = benign.size() > malware.size() ? benign : malware;
    const std::size_t keep = std::min(benign.size(), malware.size());
    CounterRng rng(seed, 0xba1a);
    const auto picked = sample_without_replacement(majority.size(), keep, rng);

    std::vector<char> keep_mask(corpus.sessions.size(), 1);
    for (auto i : majority) keep_mask[i] = 0;
    for (auto p : picked) keep_mask[majority[p]] = 1;

    LabeledCorpus out{corpus.dataset_name, {}};
    out.sessions.reserve(2 * keep);
    for (std::size_t i = 0; i < corpus.sessions.size(); ++i)
        if (keep_mask[i]) out.sessions.push_back(corpus.sessions[i]);
    return out;
}

LabeledCorpus min_family_filter(const LabeledCorpus& corpus, std::size_t min_sessions) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : corpus.sessions)
        if (s.label == Label::Malware) ++counts[s.family];
    LabeledCorpus out{corpus.dataset_name, {}};
    for (const auto& s : corpus.sessions)
        if (s.label == Label::Benign || counts[s.family] >= min_sessions) out.sessions.push_back(s);
    return out;
}

} // namespace mtc::dataset
