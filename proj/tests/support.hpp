#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mtc/capture/packet.hpp"
#include "mtc/capture/session.hpp"
#include "mtc/common/digest.hpp"
#include "mtc/dataset/corpus.hpp"

namespace mtc::test {

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

capture::ParsedPacket udp_packet(const std::string& src, std::uint16_t sport, const std::string& dst,
                                 std::uint16_t dport, std::uint64_t ts_us, std::vector<std::uint8_t> payload = {});

capture::ParsedPacket tcp_packet(const std::string& src, std::uint16_t sport, const std::string& dst,
                                 std::uint16_t dport, std::uint64_t ts_us, std::uint8_t flags,
                                 std::vector<std::uint8_t> payload = {});

std::vector<std::uint8_t> bytes_of(const std::string& text);

/// A single-session wrapper around hand-made packets (all in one flow).
capture::Session session_of(std::vector<capture::ParsedPacket> packets);

/// Labeled session with `payload_bytes` random bytes split over a few packets.
dataset::LabeledSession random_labeled_session(std::mt19937_64& gen, dataset::Label label, const std::string& family,
                                               std::size_t payload_bytes, std::uint16_t server_port = 443,
                                               capture::Transport transport = capture::Transport::TCP,
                                               const std::string& server = "198.51.100.1");

} // namespace mtc::test
