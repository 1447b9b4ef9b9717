#include "mtc/synth/planted.hpp"

#include <algorithm>

#include "mtc/capture/pcap_writer.hpp"
#include "mtc/common/rng.hpp"
#include "mtc/dataset/manifest.hpp"

namespace mtc::synth {

using capture::IpAddress;
using capture::ParsedPacket;
using capture::Transport;
namespace flag = capture::tcp_flag;

Signature signature_block(std::uint32_t id, std::size_t offset, std::size_t length) {
    CounterRng rng(0x5167a7u, id);
    Signature s{offset, {}};
    for (std::size_t i = 0; i < length; ++i) s.bytes.push_back(static_cast<std::uint8_t>(rng.next()));
    return s;
}

std::vector<FamilySpec> default_families() {
    const std::vector<Signature> shared = {signature_block(1, 40), signature_block(2, 300), signature_block(3, 600)};
    FamilySpec a{"SharedA", shared};
    FamilySpec b{"SharedB", shared};
    b.signatures.push_back(signature_block(4, 120));
    b.signatures.push_back(signature_block(5, 450));
    FamilySpec d{"Disjoint", {signature_block(6, 60), signature_block(7, 220), signature_block(8, 520),
                              signature_block(9, 700)}};
    return {a, b, d};
}

namespace {

constexpr std::uint64_t kSessionGapUs = 5'000'000;
constexpr std::uint64_t kPacketGapUs = 1'000;

struct Builder {
    capture::PcapWriter writer;
    std::uint64_t clock_us = 1'600'000'000ULL * 1'000'000ULL;
    std::uint32_t next_client = 0;

    IpAddress client_ip(std::uint8_t subnet) {
        const std::uint32_t n = next_client++;
        return IpAddress::v4(10, subnet, static_cast<std::uint8_t>(n / 250), static_cast<std::uint8_t>(n % 250 + 1));
    }

    void emit(ParsedPacket p) {
        p.timestamp_us = clock_us;
        clock_us += kPacketGapUs;
        writer.add_packet(p);
    }

    ParsedPacket tcp(const IpAddress& src, std::uint16_t sport, const IpAddress& dst, std::uint16_t dport,
                     std::uint8_t flags, std::vector<std::uint8_t> payload = {}) {
        ParsedPacket p;
        p.ip_src = src;
        p.ip_dst = dst;
        p.port_src = sport;
        p.port_dst = dport;
        p.transport = Transport::TCP;
        p.tcp_flags = flags;
        p.payload = std::move(payload);
        return p;
    }

    /// Full handshake, alternating data segments cut from `stream`, FIN both ways.
    void tcp_session(const IpAddress& client, std::uint16_t cport, const IpAddress& server, std::uint16_t sport,
                     const std::vector<std::uint8_t>& stream, const std::vector<std::size_t>& cuts) {
        emit(tcp(client, cport, server, sport, flag::SYN));
        emit(tcp(server, sport, client, cport, flag::SYN | flag::ACK));
        emit(tcp(client, cport, server, sport, flag::ACK));
        std::size_t start = 0;
        for (std::size_t k = 0; k < cuts.size(); ++k) {
            std::vector<std::uint8_t> seg(stream.begin() + static_cast<std::ptrdiff_t>(start),
                                          stream.begin() + static_cast<std::ptrdiff_t>(cuts[k]));
            if (k % 2 == 0) emit(tcp(client, cport, server, sport, flag::PSH | flag::ACK, std::move(seg)));
            else emit(tcp(server, sport, client, cport, flag::PSH | flag::ACK, std::move(seg)));
            start = cuts[k];
        }
        emit(tcp(client, cport, server, sport, flag::FIN | flag::ACK));
        emit(tcp(server, sport, client, cport, flag::FIN | flag::ACK));
        emit(tcp(client, cport, server, sport, flag::ACK));
        clock_us += kSessionGapUs;
    }

    void udp_exchange(const IpAddress& src, std::uint16_t sport, const IpAddress& dst, std::uint16_t dport,
                      std::vector<std::uint8_t> payload) {
        ParsedPacket p;
        p.ip_src = src;
        p.ip_dst = dst;
        p.port_src = sport;
        p.port_dst = dport;
        p.transport = Transport::UDP;
        p.payload = std::move(payload);
        emit(p);
        clock_us += kSessionGapUs;
    }
};

std::vector<std::uint8_t> random_bytes(CounterRng& rng, std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng.next());
    return out;
}

/// Segment boundaries: each segment gets a TLS-style record header. The
/// first segment is at least 400 bytes so the first signature block of
/// every family sits inside the first packet.
std::vector<std::size_t> frame_stream(std::vector<std::uint8_t>& stream, CounterRng& rng) {
    std::vector<std::size_t> cuts;
    std::size_t pos = 0;
    bool first = true;
    while (pos < stream.size()) {
        const std::size_t lo = first ? 400 : 100;
        std::size_t len = lo + rng.below(1400 - lo + 1);
        len = std::min(len, stream.size() - pos);
        if (stream.size() - pos - len < 20) len = stream.size() - pos;
        if (len >= 5) {
            stream[pos] = first ? 0x16 : 0x17;
            stream[pos + 1] = 0x03;
            stream[pos + 2] = first ? 0x01 : 0x03;
            const auto body = static_cast<std::uint16_t>(len - 5);
            stream[pos + 3] = static_cast<std::uint8_t>(body >> 8);
            stream[pos + 4] = static_cast<std::uint8_t>(body);
        }
        pos += len;
        cuts.push_back(pos);
        first = false;
    }
    return cuts;
}

std::size_t add_noise(Builder& b, CounterRng& rng, std::uint8_t subnet, std::size_t count) {
    const auto server = IpAddress::v4(192, 0, 2, 53);
    for (std::size_t i = 0; i < count; ++i) {
        const auto client = b.client_ip(subnet);
        const auto port = static_cast<std::uint16_t>(50000 + rng.below(10000));
        switch (i % 4) {
        case 0: // short TLS-looking session, below any sensible payload floor
        {
            auto stream = random_bytes(rng, 100 + rng.below(500));
            const auto cuts = frame_stream(stream, rng);
            b.tcp_session(client, port, IpAddress::v4(198, 51, 100, 7), 443, stream, cuts);
            break;
        }
        case 1: b.udp_exchange(client, port, server, 53, random_bytes(rng, 900 + rng.below(200))); break;
        case 2: b.udp_exchange(client, 137, IpAddress::v4(10, subnet, 255, 255), 137, random_bytes(rng, 900)); break;
        default: b.udp_exchange(client, port, IpAddress::v4(255, 255, 255, 255), 9999, random_bytes(rng, 1000)); break;
        }
    }
    return count;
}

} // namespace

PlantedCorpus write_planted_corpus(const std::filesystem::path& dir, const PlantedOptions& options) {
    std::filesystem::create_directories(dir);
    const auto families = options.families.empty() ? default_families() : options.families;

    dataset::DatasetManifest manifest;
    manifest.dataset_name = options.dataset_name;
    manifest.base_dir = dir;
    PlantedCorpus out;

    for (std::size_t cls = 0; cls <= families.size(); ++cls) {
        const bool benign = cls == 0;
        const std::string name = benign ? std::string(dataset::kBenignFamily) : families[cls - 1].name;
        CounterRng rng(derive_seed(options.seed, 0x5e55 + cls), 0);
        Builder b;
        const auto subnet = static_cast<std::uint8_t>(cls + 1);
        const auto server = IpAddress::v4(203, 0, 113, static_cast<std::uint8_t>(cls + 1));

        for (std::size_t i = 0; i < options.sessions_per_class; ++i) {
            auto stream = random_bytes(rng, 900 + rng.below(1700));
            const auto cuts = frame_stream(stream, rng);
            if (!benign)
                for (const auto& sig : families[cls - 1].signatures)
                    std::copy(sig.bytes.begin(), sig.bytes.end(), stream.begin() + static_cast<std::ptrdiff_t>(sig.offset));
            const auto port = static_cast<std::uint16_t>(20000 + i % 40000);
            b.tcp_session(b.client_ip(subnet), port, server, 443, stream, cuts);
            ++out.class_sessions;
        }
        if (options.noise) out.noise_sessions += add_noise(b, rng, subnet, std::max<std::size_t>(4, options.sessions_per_class / 10));

        const auto file = name + ".pcap";
        b.writer.save(dir / file);
        out.captures.push_back(dir / file);
        manifest.entries.push_back(
            {file, benign ? dataset::Label::Benign : dataset::Label::Malware, name, options.dataset_name});
    }
    out.manifest = dir / "manifest.json";
    manifest.save(out.manifest);
    return out;
}

} // namespace mtc::synth
