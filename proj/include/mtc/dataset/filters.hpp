#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtc/dataset/corpus.hpp"

namespace mtc::dataset {

inline constexpr std::uint64_t kDefaultMinPayload = 784;
inline constexpr std::size_t kDefaultMinFamilySessions = 100;

/// Keeps sessions with at least `threshold` payload bytes. Order preserved.
/// Throws std::invalid_argument when threshold is 0.
LabeledCorpus filter_min_payload(const LabeledCorpus& corpus, std::uint64_t threshold = kDefaultMinPayload);

/// One denylist rule. A port rule matches when either endpoint port lies in
/// [port_lo, port_hi] (and the transport matches, if given). A broadcast rule
/// matches when any packet targets a broadcast or multicast address.
struct NoiseRule {
    std::string name;
    std::optional<capture::Transport> transport;
    std::uint16_t port_lo = 0;
    std::uint16_t port_hi = 0;
    bool broadcast = false;

    bool matches(const capture::Session& s) const;
};

/// DNS, SNMP, LLMNR, NetBIOS, SSDP, DHCP and broadcast/multicast traffic.
std::vector<NoiseRule> default_denylist();

struct NoiseFilterResult {
    LabeledCorpus corpus;
    /// Removed sessions per rule, in denylist order; each session is charged
    /// to the first rule it matches, so the tallies sum to the removal count.
    std::vector<std::pair<std::string, std::size_t>> removed;
};

/// Throws std::invalid_argument on an empty denylist.
NoiseFilterResult filter_noise(const LabeledCorpus& corpus, const std::vector<NoiseRule>& denylist = default_denylist());

/// Uniformly downsamples the majority label to the minority count. The
/// kept sessions stay in their original order. Throws OneClassOnly.
LabeledCorpus balance_benign_malware(const LabeledCorpus& corpus, std::uint64_t seed);

/// Drops malware families with fewer than `min_sessions` sessions.
LabeledCorpus min_family_filter(const LabeledCorpus& corpus, std::size_t min_sessions = kDefaultMinFamilySessions);

} // namespace mtc::dataset
