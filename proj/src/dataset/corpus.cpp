#include "mtc/dataset/corpus.hpp"

#include <set>

#include "mtc/common/byte_io.hpp"
#include "mtc/common/error.hpp"

namespace mtc::dataset {

namespace {

void put_endpoint(ByteWriter& w, const capture::Endpoint& e) {
    w.put(e.addr.version);
    w.put_bytes(e.addr.bytes);
    w.put(e.port);
}

} // namespace

Digest128 make_session_id(const std::string& capture_path, const capture::FlowKey& key,
                          std::uint32_t session_index) {
    ByteWriter w;
    w.put_string(capture_path);
    put_endpoint(w, key.a);
    put_endpoint(w, key.b);
    w.put(static_cast<std::uint8_t>(key.transport));
    w.put(session_index);
    return digest128(w.buffer());
}

IngestResult build_corpus(const DatasetManifest& manifest, const capture::SessionTimeouts& timeouts) {
    manifest.validate();
    for (const auto& e : manifest.entries) {
        if (!std::filesystem::exists(manifest.resolve(e)))
            throw MissingFile("capture not found: " + manifest.resolve(e).string());
    }

    const std::size_t n = manifest.entries.size();
    std::vector<std::vector<LabeledSession>> per_file(n);
    std::vector<FileIngest> files(n);
    std::vector<std::string> errors(n);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < n; ++i) {
        const auto& entry = manifest.entries[i];
        try {
            auto contents = capture::parse_capture(manifest.resolve(entry));
            auto sessions = capture::assemble_sessions(contents.packets, timeouts);
            files[i] = {entry.path, contents.counters, sessions.size()};
            std::string family = entry.family;
            if (manifest.suffix_family_with_source && entry.label == Label::Malware && !entry.source_dataset.empty())
                family += "@" + entry.source_dataset;
            per_file[i].reserve(sessions.size());
            for (auto& s : sessions) {
                LabeledSession ls;
                ls.session_id = make_session_id(entry.path, s.key, s.session_index);
                ls.session = std::move(s);
                ls.label = entry.label;
                ls.family = family;
                ls.source_dataset = entry.source_dataset;
                per_file[i].push_back(std::move(ls));
            }
        } catch (const std::exception& ex) {
            errors[i] = ex.what();
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!errors[i].empty()) throw UnreadableFile(manifest.entries[i].path + ": " + errors[i]);

    IngestResult out;
    out.corpus.dataset_name = manifest.dataset_name;
    for (std::size_t i = 0; i < n; ++i) {
        if (per_file[i].empty()) out.warnings.push_back("empty capture: " + files[i].path);
        if (files[i].counters.truncated_records)
            out.warnings.push_back("truncated record at end of " + files[i].path);
        for (auto& s : per_file[i]) out.corpus.sessions.push_back(std::move(s));
    }
    out.files = std::move(files);
    return out;
}

bool is_tls_session(const capture::Session& s) {
    for (const auto& sp : s.packets) {
        const auto& p = sp.packet.payload;
        if (p.size() >= 3 && p[0] >= 0x14 && p[0] <= 0x17 && p[1] == 0x03 && p[2] >= 0x01 && p[2] <= 0x04)
            return true;
    }
    return false;
}

double CorpusStats::tls_share(Label l) const {
    const std::size_t total = l == Label::Benign ? benign : malware;
    const std::size_t tls = l == Label::Benign ? benign_tls : malware_tls;
    return total == 0 ? 0.0 : static_cast<double>(tls) / static_cast<double>(total);
}

CorpusStats compute_stats(const LabeledCorpus& corpus) {
    CorpusStats st;
    for (const auto& ls : corpus.sessions) {
        const bool tls = is_tls_session(ls.session);
        if (ls.label == Label::Benign) {
            ++st.benign;
            st.benign_tls += tls;
        } else {
            ++st.malware;
            st.malware_tls += tls;
        }
        ++st.per_family[ls.family];
    }
    return st;
}

std::vector<std::string> malware_families(const LabeledCorpus& corpus) {
    std::set<std::string> fams;
    for (const auto& ls : corpus.sessions)
        if (ls.label == Label::Malware) fams.insert(ls.family);
    return {fams.begin(), fams.end()};
}

} // namespace mtc::dataset
