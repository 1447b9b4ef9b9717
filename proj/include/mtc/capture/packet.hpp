#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mtc::capture {

enum class Transport : std::uint8_t { TCP = 6, UDP = 17 };

namespace tcp_flag {
inline constexpr std::uint8_t FIN = 0x01;
inline constexpr std::uint8_t SYN = 0x02;
inline constexpr std::uint8_t RST = 0x04;
inline constexpr std::uint8_t PSH = 0x08;
inline constexpr std::uint8_t ACK = 0x10;
inline constexpr std::uint8_t URG = 0x20;
inline constexpr std::uint8_t ECE = 0x40;
inline constexpr std::uint8_t CWR = 0x80;
} // namespace tcp_flag

/// IPv4 or IPv6 address. IPv4 occupies the first four bytes; the rest is zero.
struct IpAddress {
    std::uint8_t version = 4;
    std::array<std::uint8_t, 16> bytes{};

    static IpAddress v4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
        IpAddress ip;
        ip.bytes[0] = a;
        ip.bytes[1] = b;
        ip.bytes[2] = c;
        ip.bytes[3] = d;
        return ip;
    }
    /// Parses dotted-quad IPv4 or colon-hex IPv6; throws std::invalid_argument.
    static IpAddress parse(const std::string& text);

    bool is_broadcast_or_multicast() const;
    std::string to_string() const;

    auto operator<=>(const IpAddress&) const = default;
};

struct Endpoint {
    IpAddress addr;
    std::uint16_t port = 0;

    auto operator<=>(const Endpoint&) const = default;
};

struct ParsedPacket {
    std::uint64_t timestamp_us = 0;
    IpAddress ip_src;
    IpAddress ip_dst;
    std::uint16_t port_src = 0;
    std::uint16_t port_dst = 0;
    Transport transport = Transport::TCP;
    std::optional<std::uint8_t> tcp_flags; ///< set for TCP only
    std::vector<std::uint8_t> payload;     ///< transport payload, headers stripped
    std::uint32_t caplen = 0;
    std::uint32_t wirelen = 0;

    Endpoint source() const { return {ip_src, port_src}; }
    Endpoint destination() const { return {ip_dst, port_dst}; }
    bool has_flag(std::uint8_t f) const { return tcp_flags && (*tcp_flags & f) != 0; }

    bool operator==(const ParsedPacket&) const = default;
};

} // namespace mtc::capture
