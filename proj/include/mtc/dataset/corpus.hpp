#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mtc/capture/pcap_reader.hpp"
#include "mtc/capture/session.hpp"
#include "mtc/common/digest.hpp"
#include "mtc/dataset/manifest.hpp"

namespace mtc::dataset {

struct LabeledSession {
    capture::Session session;
    Label label = Label::Benign;
    std::string family = std::string(kBenignFamily);
    std::string source_dataset;
    Digest128 session_id{};

    bool operator==(const LabeledSession&) const = default;
};

struct LabeledCorpus {
    std::string dataset_name;
    std::vector<LabeledSession> sessions;

    std::size_t size() const { return sessions.size(); }
    bool empty() const { return sessions.empty(); }
    bool operator==(const LabeledCorpus&) const = default;
};

/// Stable digest of (capture path as listed in the manifest, flow key, session index).
Digest128 make_session_id(const std::string& capture_path, const capture::FlowKey& key,
                          std::uint32_t session_index);

struct FileIngest {
    std::string path;
    capture::CaptureCounters counters;
    std::size_t sessions = 0;
};

struct IngestResult {
    LabeledCorpus corpus;
    std::vector<FileIngest> files;
    std::vector<std::string> warnings; ///< empty captures, truncated records
};

/// Parses every capture in the manifest (files in parallel), assembles
/// sessions and labels them. Sessions appear in manifest order, then
/// session order within each file.
///
/// Throws DuplicatePath, MissingFile, UnreadableFile.
IngestResult build_corpus(const DatasetManifest& manifest, const capture::SessionTimeouts& timeouts = {});

struct CorpusStats {
    std::size_t benign = 0;
    std::size_t malware = 0;
    std::size_t benign_tls = 0;
    std::size_t malware_tls = 0;
    std::map<std::string, std::size_t> per_family; ///< includes "benign"

    /// Fraction of the label's sessions detected as TLS; 0 when the label is absent.
    double tls_share(Label l) const;
};

/// True when any packet payload starts with a TLS record header
/// (content type 0x14..0x17, version 0x0301..0x0304).
bool is_tls_session(const capture::Session& s);

CorpusStats compute_stats(const LabeledCorpus& corpus);

/// Malware family names in ascending order.
std::vector<std::string> malware_families(const LabeledCorpus& corpus);

} // namespace mtc::dataset
