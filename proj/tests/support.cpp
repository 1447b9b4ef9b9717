#include "support.hpp"

#include <atomic>
#include <unistd.h>

namespace mtc::test {

using capture::IpAddress;
using capture::ParsedPacket;
using capture::Transport;

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mtc-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

ParsedPacket udp_packet(const std::string& src, std::uint16_t sport, const std::string& dst, std::uint16_t dport,
                        std::uint64_t ts_us, std::vector<std::uint8_t> payload) {
    ParsedPacket p;
    p.timestamp_us = ts_us;
    p.ip_src = IpAddress::parse(src);
    p.ip_dst = IpAddress::parse(dst);
    p.port_src = sport;
    p.port_dst = dport;
    p.transport = Transport::UDP;
    p.payload = std::move(payload);
    p.caplen = static_cast<std::uint32_t>(42 + p.payload.size());
    p.wirelen = p.caplen;
    return p;
}

ParsedPacket tcp_packet(const std::string& src, std::uint16_t sport, const std::string& dst, std::uint16_t dport,
                        std::uint64_t ts_us, std::uint8_t flags, std::vector<std::uint8_t> payload) {
    ParsedPacket p = udp_packet(src, sport, dst, dport, ts_us, std::move(payload));
    p.transport = Transport::TCP;
    p.tcp_flags = flags;
    p.caplen += 12;
    p.wirelen = p.caplen;
    return p;
}

std::vector<std::uint8_t> bytes_of(const std::string& text) { return {text.begin(), text.end()}; }

capture::Session session_of(std::vector<ParsedPacket> packets) {
    auto sessions = capture::assemble_sessions(packets);
    return sessions.at(0);
}

dataset::LabeledSession random_labeled_session(std::mt19937_64& gen, dataset::Label label, const std::string& family,
                                               std::size_t payload_bytes, std::uint16_t server_port,
                                               Transport transport, const std::string& server) {
    static std::atomic<std::uint32_t> next{0};
    const std::uint32_t n = next++;
    // stay clear of x.x.x.255 broadcast addresses and denylisted ports
    const std::string client = "10." + std::to_string(n / 62500 % 250) + "." + std::to_string(n / 250 % 250) +
                               "." + std::to_string(1 + n % 250);
    const auto cport = static_cast<std::uint16_t>(20000 + n % 40000);
    std::vector<ParsedPacket> pkts;
    std::uint64_t ts = 1'000'000'000ULL + n * 1000ULL;
    std::size_t left = payload_bytes;
    bool forward = true;
    do {
        const std::size_t chunk = std::min<std::size_t>(left, 1 + gen() % 600);
        std::vector<std::uint8_t> pl(chunk);
        for (auto& b : pl) b = static_cast<std::uint8_t>(gen());
        auto p = transport == Transport::TCP
                     ? (forward ? tcp_packet(client, cport, server, server_port, ts, 0x18, std::move(pl))
                                : tcp_packet(server, server_port, client, cport, ts, 0x18, std::move(pl)))
                     : (forward ? udp_packet(client, cport, server, server_port, ts, std::move(pl))
                                : udp_packet(server, server_port, client, cport, ts, std::move(pl)));
        pkts.push_back(std::move(p));
        left -= chunk;
        ts += 1 + gen() % 5000;
        forward = !forward;
    } while (left > 0);

    dataset::LabeledSession ls;
    ls.session = session_of(std::move(pkts));
    ls.label = label;
    ls.family = family;
    ls.source_dataset = "test";
    ls.session_id = dataset::make_session_id("mem/" + family, ls.session.key, n);
    return ls;
}

} // namespace mtc::test
