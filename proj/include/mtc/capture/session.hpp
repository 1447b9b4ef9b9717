#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mtc/capture/packet.hpp"

namespace mtc::capture {

/// Bidirectional 5-tuple with the lexicographically smaller endpoint first,
/// so key(A->B) == key(B->A).
struct FlowKey {
    Endpoint a;
    Endpoint b;
    Transport transport = Transport::TCP;

    static FlowKey of(const ParsedPacket& p);

    auto operator<=>(const FlowKey&) const = default;
};

enum class Direction : std::uint8_t { Forward = 0, Backward = 1 }; ///< relative to the initiator

struct SessionPacket {
    ParsedPacket packet;
    Direction direction = Direction::Forward;

    bool operator==(const SessionPacket&) const = default;
};

struct Session {
    FlowKey key;
    Endpoint initiator;
    std::vector<SessionPacket> packets;
    std::uint64_t total_payload_bytes = 0;
    std::uint32_t session_index = 0;

    std::uint64_t first_timestamp_us() const { return packets.front().packet.timestamp_us; }
    std::uint64_t last_timestamp_us() const { return packets.back().packet.timestamp_us; }

    bool operator==(const Session&) const = default;
};

struct SessionTimeouts {
    double tcp_idle_seconds = 300.0;
    double udp_idle_seconds = 300.0;
};

/// Groups time-ordered packets of one capture into sessions.
///
/// A tuple's session ends on idle timeout. For TCP it is also complete once
/// FIN has been seen in both directions or any RST has been seen; trailing
/// non-SYN packets still attach to the completed session and a fresh SYN
/// (SYN without ACK) opens the next one. Sessions are returned ordered by
/// their first packet.
std::vector<Session> assemble_sessions(std::span<const ParsedPacket> packets,
                                       const SessionTimeouts& timeouts = {});

} // namespace mtc::capture
