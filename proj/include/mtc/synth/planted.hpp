#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mtc::synth {

/// Fixed bytes written at a fixed offset of a session's payload stream.
struct Signature {
    std::size_t offset = 0;
    std::vector<std::uint8_t> bytes;
};

struct FamilySpec {
    std::string name;
    std::vector<Signature> signatures;
};

/// Planted-signal corpus: TLS-looking TCP sessions whose class is encoded
/// only in payload bytes at fixed stream offsets. Every class shares the
/// same record framing and random filler; benign sessions carry no
/// signature.
struct PlantedOptions {
    std::string dataset_name = "SYNTH";
    std::vector<FamilySpec> families;  ///< empty = default_families()
    std::size_t sessions_per_class = 400;
    std::uint64_t seed = 1;
    /// Adds short sessions, DNS, NetBIOS and broadcast traffic to every
    /// capture so preprocessing has something to remove.
    bool noise = true;
};

/// Signature blocks used by default_families(). Offsets all lie inside the
/// first 784 payload bytes, and the first block inside the first packet.
Signature signature_block(std::uint32_t id, std::size_t offset, std::size_t length = 8);

/// "SharedA" and "SharedB" carry the same three blocks, SharedB adds two
/// marker blocks of its own; "Disjoint" shares nothing with either.
std::vector<FamilySpec> default_families();

struct PlantedCorpus {
    std::filesystem::path manifest;
    std::vector<std::filesystem::path> captures;
    std::size_t class_sessions = 0; ///< sessions carrying a class, all classes
    std::size_t noise_sessions = 0;
};

/// Writes one pcap per class plus manifest.json into `dir`.
PlantedCorpus write_planted_corpus(const std::filesystem::path& dir, const PlantedOptions& options);

} // namespace mtc::synth
