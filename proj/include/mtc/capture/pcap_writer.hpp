#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mtc/capture/packet.hpp"

namespace mtc::capture {

/// Serializes a packet as an Ethernet II frame carrying IPv4/IPv6 and
/// TCP/UDP headers around `pkt.payload`. Checksums are left zero.
std::vector<std::uint8_t> build_ethernet_frame(const ParsedPacket& pkt);

/// Minimal classic-pcap writer (microsecond resolution, little endian).
class PcapWriter {
public:
    explicit PcapWriter(std::uint16_t linktype = 1);

    void add_frame(std::uint64_t timestamp_us, std::span<const std::uint8_t> frame,
                   std::uint32_t wirelen = 0);
    /// Convenience: build_ethernet_frame + add_frame.
    void add_packet(const ParsedPacket& pkt);

    const std::vector<std::uint8_t>& bytes() const { return buf_; }
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::uint8_t> buf_;
};

} // namespace mtc::capture
