#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mtc/dataset/corpus.hpp"

namespace mtc::dataset {

/// Corpus store layout (all integers little endian):
///
///     "MTC1"
///     dataset_name           u32 length + UTF-8
///     record*                u32 record length, then:
///         session_id         16 bytes
///         label              u8 (0 benign, 1 malware)
///         family, source     u32 length + UTF-8 each
///         transport          u8 (6 TCP, 17 UDP)
///         endpoint a, b      u8 ip version, 16 address bytes, u16 port
///         initiator          u8 (0 = a, 1 = b)
///         session_index      u32
///         packet count       u32
///         packet*            u64 timestamp us, u8 direction, u8 tcp flags,
///                            u32 caplen, u32 wirelen, u32 payload length + bytes
///     crc32                  u32 over every preceding byte
std::vector<std::uint8_t> encode_corpus(const LabeledCorpus& corpus);
/// Throws CorruptStore on bad magic, bad checksum or malformed records.
LabeledCorpus decode_corpus(std::span<const std::uint8_t> bytes);

void save_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path);
LabeledCorpus load_corpus(const std::filesystem::path& path);

} // namespace mtc::dataset
