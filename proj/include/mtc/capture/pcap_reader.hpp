#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mtc/capture/packet.hpp"

namespace mtc::capture {

struct CaptureCounters {
    std::uint64_t frames = 0;            ///< records seen in the file
    std::uint64_t accepted = 0;          ///< TCP/UDP packets yielded
    std::uint64_t skipped_non_ip = 0;    ///< ARP, LLDP, unknown link types...
    std::uint64_t skipped_fragments = 0; ///< non-first IP fragments
    std::uint64_t skipped_other = 0;     ///< IP but not TCP/UDP, or malformed headers
    std::uint64_t truncated_records = 0; ///< a record cut off at the end of the file

    std::uint64_t skipped() const { return skipped_non_ip + skipped_fragments + skipped_other; }
};

/// Streaming reader for classic pcap (micro- and nanosecond, either byte
/// order) and pcapng (SHB/IDB/EPB/SPB). Link types: Ethernet, raw IPv4/IPv6,
/// Linux cooked v1, BSD loopback.
///
/// Throws UnreadableFile if the file cannot be opened or the header is bad.
class CaptureReader {
public:
    explicit CaptureReader(const std::filesystem::path& path);
    /// Parses an in-memory capture image.
    explicit CaptureReader(std::vector<std::uint8_t> image);

    /// Next accepted TCP/UDP packet in file order, or nullopt at end of stream.
    std::optional<ParsedPacket> next();

    const CaptureCounters& counters() const { return counters_; }

private:
    struct Interface {
        std::uint16_t linktype = 1;
        std::uint64_t ticks_per_second = 1'000'000;
    };

    void read_file_header();
    void read_pcapng_section_header(std::size_t at);
    /// Returns false at end of stream.
    bool next_frame(std::span<const std::uint8_t>& frame, std::uint16_t& linktype,
                    std::uint64_t& ts_us, std::uint32_t& wirelen);
    bool next_pcap_frame(std::span<const std::uint8_t>& frame, std::uint16_t& linktype,
                         std::uint64_t& ts_us, std::uint32_t& wirelen);
    bool next_pcapng_frame(std::span<const std::uint8_t>& frame, std::uint16_t& linktype,
                           std::uint64_t& ts_us, std::uint32_t& wirelen);
    std::uint16_t rd16(std::size_t at) const;
    std::uint32_t rd32(std::size_t at) const;

    std::vector<std::uint8_t> image_;
    std::size_t pos_ = 0;
    bool pcapng_ = false;
    bool swapped_ = false;
    bool nanos_ = false;
    std::uint16_t pcap_linktype_ = 1;
    std::vector<Interface> interfaces_;
    CaptureCounters counters_;
};

struct CaptureContents {
    std::vector<ParsedPacket> packets;
    CaptureCounters counters;
};

/// Reads a whole capture into memory.
CaptureContents parse_capture(const std::filesystem::path& path);

/// Decodes a single link-layer frame. Returns nullopt (and bumps the matching
/// counter) when the frame is not an acceptable TCP/UDP packet.
std::optional<ParsedPacket> decode_frame(std::span<const std::uint8_t> frame, std::uint16_t linktype,
                                         std::uint64_t ts_us, std::uint32_t wirelen,
                                         CaptureCounters& counters);

} // namespace mtc::capture
