#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"

#include "mtc/capture/pcap_writer.hpp"
#include "mtc/common/byte_io.hpp"
#include "mtc/common/error.hpp"
#include "mtc/dataset/corpus.hpp"
#include "mtc/dataset/filters.hpp"
#include "mtc/dataset/manifest.hpp"
#include "mtc/dataset/store.hpp"
#include "support.hpp"

using namespace mtc;
using namespace mtc::dataset;
using capture::tcp_flag::ACK;
using capture::tcp_flag::PSH;
using mtc::test::random_labeled_session;
using mtc::test::tcp_packet;
using mtc::test::udp_packet;

namespace {

/// Three TCP sessions on distinct client ports.
void write_three_sessions(const std::filesystem::path& path) {
    capture::PcapWriter w;
    for (std::uint16_t i = 0; i < 3; ++i) {
        const auto port = static_cast<std::uint16_t>(4000 + i);
        w.add_packet(tcp_packet("10.0.0.1", port, "10.0.0.2", 443, 1'000'000 + i * 10'000, PSH | ACK,
                                std::vector<std::uint8_t>(100, 0x41)));
        w.add_packet(tcp_packet("10.0.0.2", 443, "10.0.0.1", port, 1'000'500 + i * 10'000, PSH | ACK,
                                std::vector<std::uint8_t>(50, 0x42)));
    }
    w.save(path);
}

LabeledCorpus mixed_corpus(std::mt19937_64& gen, std::size_t benign, std::size_t malware,
                           std::size_t bytes = 800) {
    LabeledCorpus c{"T", {}};
    for (std::size_t i = 0; i < benign; ++i) c.sessions.push_back(random_labeled_session(gen, Label::Benign, "benign", bytes));
    for (std::size_t i = 0; i < malware; ++i)
        c.sessions.push_back(random_labeled_session(gen, Label::Malware, i % 2 ? "Zeus" : "Neris", bytes));
    return c;
}

std::size_t count(const LabeledCorpus& c, Label l) {
    return static_cast<std::size_t>(
        std::count_if(c.sessions.begin(), c.sessions.end(), [&](const auto& s) { return s.label == l; }));
}

bool is_subsequence(const LabeledCorpus& sub, const LabeledCorpus& full) {
    std::size_t j = 0;
    for (const auto& s : sub.sessions) {
        while (j < full.sessions.size() && !(full.sessions[j] == s)) ++j;
        if (j == full.sessions.size()) return false;
        ++j;
    }
    return true;
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("manifest labels every session of its files") {
    test::TempDir dir("manifest");
    write_three_sessions(dir / "a.pcap");
    DatasetManifest m;
    m.dataset_name = "T";
    m.base_dir = dir.path();
    m.entries.push_back({"a.pcap", Label::Benign, "benign", "ISCX"});
    const auto r = build_corpus(m);
    REQUIRE(r.corpus.size() == 3);
    for (const auto& s : r.corpus.sessions) {
        CHECK(s.label == Label::Benign);
        CHECK(s.family == "benign");
        CHECK(s.source_dataset == "ISCX");
    }
    CHECK(r.files.at(0).sessions == 3);
}

TEST_CASE("manifest validation") {
    DatasetManifest m;
    m.entries.push_back({"a.pcap", Label::Benign, "benign", "x"});
    m.entries.push_back({"a.pcap", Label::Benign, "benign", "x"});
    CHECK_THROWS_AS(m.validate(), DuplicatePath);
    CHECK_THROWS_AS(build_corpus(m), DuplicatePath);

    DatasetManifest bad;
    bad.entries.push_back({"b.pcap", Label::Malware, "benign", "x"});
    CHECK_THROWS_AS(bad.validate(), InvalidManifest);
    DatasetManifest bad2;
    bad2.entries.push_back({"b.pcap", Label::Benign, "Zeus", "x"});
    CHECK_THROWS_AS(bad2.validate(), InvalidManifest);
    CHECK_THROWS_AS(parse_label("maybe"), InvalidManifest);
}

TEST_CASE("manifest JSON round-trip and missing files") {
    test::TempDir dir("manifest-io");
    DatasetManifest m;
    m.dataset_name = "MTAB";
    m.suffix_family_with_source = true;
    m.entries.push_back({"x/b.pcap", Label::Benign, "benign", "ISCX"});
    m.entries.push_back({"x/m.pcap", Label::Malware, "Dridex", "MTA"});
    m.save(dir / "m.json");
    const auto back = DatasetManifest::load(dir / "m.json");
    CHECK(back.dataset_name == "MTAB");
    CHECK(back.suffix_family_with_source);
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[1].family == "Dridex");
    CHECK(back.entries[1].label == Label::Malware);
    CHECK(back.resolve(back.entries[0]) == dir.path() / "x/b.pcap");
    CHECK_THROWS_AS(build_corpus(back), MissingFile);

    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK_THROWS_AS(DatasetManifest::load(dir / "broken.json"), InvalidManifest);
}

TEST_CASE("identical bytes under different paths get distinct session ids") {
    test::TempDir dir("ids");
    write_three_sessions(dir / "cridex.pcap");
    write_three_sessions(dir / "dridex.pcap");
    DatasetManifest m;
    m.base_dir = dir.path();
    m.entries.push_back({"cridex.pcap", Label::Malware, "Cridex", "USTC"});
    m.entries.push_back({"dridex.pcap", Label::Malware, "Dridex", "MTA"});
    const auto r = build_corpus(m);
    REQUIRE(r.corpus.size() == 6);
    std::set<Digest128> ids;
    for (const auto& s : r.corpus.sessions) ids.insert(s.session_id);
    CHECK(ids.size() == 6);
    CHECK(r.corpus.sessions[0].family == "Cridex");
    CHECK(r.corpus.sessions[3].family == "Dridex");
    // ingest is deterministic
    CHECK(build_corpus(m).corpus == r.corpus);
}

TEST_CASE("source suffix keeps same-named families apart") {
    test::TempDir dir("suffix");
    write_three_sessions(dir / "a.pcap");
    write_three_sessions(dir / "b.pcap");
    DatasetManifest m;
    m.base_dir = dir.path();
    m.suffix_family_with_source = true;
    m.entries.push_back({"a.pcap", Label::Malware, "Zeus", "USTC"});
    m.entries.push_back({"b.pcap", Label::Malware, "Zeus", "MTA"});
    const auto fams = malware_families(build_corpus(m).corpus);
    CHECK(fams == std::vector<std::string>{"Zeus@MTA", "Zeus@USTC"});
}

TEST_CASE("empty capture is a warning, not an error") {
    test::TempDir dir("empty");
    capture::PcapWriter().save(dir / "e.pcap");
    DatasetManifest m;
    m.base_dir = dir.path();
    m.entries.push_back({"e.pcap", Label::Benign, "benign", "x"});
    const auto r = build_corpus(m);
    CHECK(r.corpus.empty());
    CHECK(r.warnings.size() == 1);
}

TEST_CASE("min payload filter boundary") {
    std::mt19937_64 gen(1);
    LabeledCorpus c{"T", {}};
    c.sessions.push_back(random_labeled_session(gen, Label::Benign, "benign", 783));
    c.sessions.push_back(random_labeled_session(gen, Label::Benign, "benign", 784));
    c.sessions.push_back(random_labeled_session(gen, Label::Malware, "Zeus", 5000));
    const auto f = filter_min_payload(c);
    REQUIRE(f.size() == 2);
    CHECK(f.sessions[0].session.total_payload_bytes == 784);
    CHECK(filter_min_payload(LabeledCorpus{}).empty());
    CHECK_THROWS_AS(filter_min_payload(c, 0), std::invalid_argument);
}

TEST_CASE("noise filter removes denylisted sessions and tallies per rule") {
    std::mt19937_64 gen(2);
    LabeledCorpus c{"T", {}};
    c.sessions.push_back(random_labeled_session(gen, Label::Benign, "benign", 900, 53, capture::Transport::UDP));
    c.sessions.push_back(random_labeled_session(gen, Label::Benign, "benign", 900, 443));
    c.sessions.push_back(random_labeled_session(gen, Label::Benign, "benign", 900, 9999, capture::Transport::UDP,
                                                "255.255.255.255"));
    c.sessions.push_back(random_labeled_session(gen, Label::Malware, "Zeus", 900, 161, capture::Transport::UDP));
    c.sessions.push_back(random_labeled_session(gen, Label::Malware, "Zeus", 900, 5355, capture::Transport::UDP));
    c.sessions.push_back(random_labeled_session(gen, Label::Malware, "Zeus", 900, 1900, capture::Transport::UDP));
    c.sessions.push_back(random_labeled_session(gen, Label::Malware, "Zeus", 900, 67, capture::Transport::UDP));
    c.sessions.push_back(random_labeled_session(gen, Label::Malware, "Zeus", 900, 138, capture::Transport::UDP));
    c.sessions.push_back(random_labeled_session(gen, Label::Malware, "Zeus", 900, 53, capture::Transport::TCP));
    c.sessions.push_back(random_labeled_session(gen, Label::Malware, "Zeus", 900, 161, capture::Transport::TCP));
    const auto r = filter_noise(c);
    REQUIRE(r.corpus.size() == 2);
    CHECK(r.corpus.sessions[0].session.key.b.port == 443);
    CHECK(r.corpus.sessions[1].session.key.transport == capture::Transport::TCP);
    std::size_t removed = 0;
    for (const auto& [rule, n] : r.removed) {
        removed += n;
        if (rule == "dns") CHECK(n == 2);
        if (rule == "broadcast") CHECK(n == 1);
    }
    CHECK(removed == c.size() - r.corpus.size());
    CHECK(is_subsequence(r.corpus, c));
}

TEST_CASE("balancing downsamples the majority label") {
    std::mt19937_64 gen(3);
    const auto c = mixed_corpus(gen, 500, 100, 10);
    const auto b1 = balance_benign_malware(c, 1);
    CHECK(count(b1, Label::Benign) == 100);
    CHECK(count(b1, Label::Malware) == 100);
    CHECK(is_subsequence(b1, c));
    // malware untouched when benign is the majority
    LabeledCorpus mal_in{"T", {}}, mal_out{"T", {}};
    for (const auto& s : c.sessions)
        if (s.label == Label::Malware) mal_in.sessions.push_back(s);
    for (const auto& s : b1.sessions)
        if (s.label == Label::Malware) mal_out.sessions.push_back(s);
    CHECK(mal_in == mal_out);

    const auto b2 = balance_benign_malware(c, 2);
    CHECK(count(b2, Label::Benign) == 100);
    CHECK_FALSE(b1 == b2);
    CHECK(balance_benign_malware(c, 1) == b1);

    const auto flipped = mixed_corpus(gen, 30, 70, 10);
    const auto b3 = balance_benign_malware(flipped, 9);
    CHECK(count(b3, Label::Benign) == 30);
    CHECK(count(b3, Label::Malware) == 30);

    const auto even = mixed_corpus(gen, 50, 50, 10);
    CHECK(balance_benign_malware(even, 4) == even);
    CHECK_THROWS_AS(balance_benign_malware(mixed_corpus(gen, 5, 0, 10), 1), OneClassOnly);
}

TEST_CASE("TLS share") {
    const auto tls = [](std::vector<std::uint8_t> first) {
        dataset::LabeledSession ls;
        ls.session = test::session_of({tcp_packet("10.0.0.1", 5000, "10.0.0.2", 443, 0, PSH | ACK, std::move(first))});
        return ls;
    };
    LabeledCorpus one{"T", {tls({0x16, 0x03, 0x01, 0x00, 0x10})}};
    CHECK(compute_stats(one).tls_share(Label::Benign) == 1.0);
    LabeledCorpus two{"T", {tls({0x16, 0x03, 0x01}), tls(test::bytes_of("GET / HTTP/1.1"))}};
    CHECK(compute_stats(two).tls_share(Label::Benign) == 0.5);

    LabeledCorpus ten{"T", {}};
    for (int i = 0; i < 10; ++i) {
        auto s = i < 7 ? tls({0x17, 0x03, 0x03, 0x00}) : tls({0x17, 0x03, 0x05, 0x00});
        s.label = Label::Malware;
        s.family = "Zeus";
        ten.sessions.push_back(s);
    }
    const auto st = compute_stats(ten);
    CHECK(st.tls_share(Label::Malware) == 0.7);
    CHECK(st.malware == 10);
    CHECK(st.per_family.at("Zeus") == 10);
    CHECK(st.tls_share(Label::Benign) == 0.0);
}

TEST_CASE("min family filter") {
    std::mt19937_64 gen(4);
    LabeledCorpus c{"T", {}};
    for (int i = 0; i < 99; ++i) c.sessions.push_back(random_labeled_session(gen, Label::Malware, "Small", 5));
    for (int i = 0; i < 100; ++i) c.sessions.push_back(random_labeled_session(gen, Label::Malware, "Exact", 5));
    for (int i = 0; i < 10; ++i) c.sessions.push_back(random_labeled_session(gen, Label::Benign, "benign", 5));
    const auto f = min_family_filter(c);
    CHECK(f.size() == 110);
    CHECK(malware_families(f) == std::vector<std::string>{"Exact"});
    CHECK(count(f, Label::Benign) == 10);
}

TEST_CASE("corpus store round-trips and detects corruption") {
    test::TempDir dir("store");
    std::mt19937_64 gen(5);
    save_corpus(LabeledCorpus{"empty", {}}, dir / "e.mtc");
    CHECK(load_corpus(dir / "e.mtc") == LabeledCorpus{"empty", {}});

    LabeledCorpus c{"three", {}};
    c.sessions.push_back(random_labeled_session(gen, Label::Benign, "benign", 900));
    c.sessions.push_back(random_labeled_session(gen, Label::Malware, "Zeus", 50, 53, capture::Transport::UDP));
    c.sessions.push_back(random_labeled_session(gen, Label::Malware, "Neris", 2000, 443, capture::Transport::TCP,
                                                "2001:db8::1"));
    save_corpus(c, dir / "c.mtc");
    const auto back = load_corpus(dir / "c.mtc");
    CHECK(back == c);
    CHECK(encode_corpus(back) == encode_corpus(c));

    auto bytes = read_file_bytes(dir / "c.mtc");
    auto flipped = bytes;
    flipped.back() ^= 0x01;
    CHECK_THROWS_AS(decode_corpus(flipped), CorruptStore);
    flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x80;
    CHECK_THROWS_AS(decode_corpus(flipped), CorruptStore);
    flipped = bytes;
    flipped[0] = 'X';
    CHECK_THROWS_AS(decode_corpus(flipped), CorruptStore);
    CHECK_THROWS_AS(decode_corpus(std::span<const std::uint8_t>(bytes.data(), 10)), CorruptStore);
}

TEST_CASE("filters are order-preserving subsets") {
    std::mt19937_64 gen(6);
    LabeledCorpus c{"T", {}};
    for (int i = 0; i < 200; ++i) {
        const auto label = gen() % 3 ? Label::Benign : Label::Malware;
        const std::uint16_t ports[] = {443, 53, 161, 80, 1900};
        const auto transport = gen() % 2 ? capture::Transport::TCP : capture::Transport::UDP;
        c.sessions.push_back(random_labeled_session(gen, label, label == Label::Benign ? "benign" : "Zeus",
                                                    500 + gen() % 600, ports[gen() % 5], transport));
    }
    const auto a = filter_min_payload(c);
    CHECK(is_subsequence(a, c));
    const auto b = filter_noise(a).corpus;
    CHECK(is_subsequence(b, a));
    const auto d = balance_benign_malware(b, 11);
    CHECK(is_subsequence(d, b));
    CHECK(count(d, Label::Benign) == count(d, Label::Malware));
}

}
