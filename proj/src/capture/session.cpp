#include "mtc/capture/session.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace mtc::capture {

FlowKey FlowKey::of(const ParsedPacket& p) {
    FlowKey k;
    k.transport = p.transport;
    const Endpoint s = p.source();
    const Endpoint d = p.destination();
    if (s <= d) {
        k.a = s;
        k.b = d;
    } else {
        k.a = d;
        k.b = s;
    }
    return k;
}

namespace {

struct ActiveFlow {
    std::size_t session = 0; ///< index into the output list
    bool fin_forward = false;
    bool fin_backward = false;
    bool reset = false;

    bool completed() const { return reset || (fin_forward && fin_backward); }
};

} // namespace

std::vector<Session> assemble_sessions(std::span<const ParsedPacket> packets,
                                       const SessionTimeouts& timeouts) {
    const auto to_us = [](double s) { return static_cast<std::uint64_t>(std::llround(s * 1e6)); };
    const std::uint64_t tcp_idle = to_us(timeouts.tcp_idle_seconds);
    const std::uint64_t udp_idle = to_us(timeouts.udp_idle_seconds);

    std::vector<Session> sessions;
    std::map<FlowKey, ActiveFlow> active;
    std::map<FlowKey, std::uint32_t> next_index;

    // captures are occasionally slightly out of order; a stable sort keeps
    // file order among equal timestamps
    std::vector<std::size_t> order(packets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return packets[x].timestamp_us < packets[y].timestamp_us;
    });

    for (const std::size_t pi : order) {
        const ParsedPacket& pkt = packets[pi];
        const FlowKey key = FlowKey::of(pkt);
        const bool tcp = key.transport == Transport::TCP;
        auto it = active.find(key);

        bool open_new = it == active.end();
        if (!open_new) {
            const Session& cur = sessions[it->second.session];
            const std::uint64_t idle = tcp ? tcp_idle : udp_idle;
            const std::uint64_t last = cur.last_timestamp_us();
            if (pkt.timestamp_us > last && pkt.timestamp_us - last > idle) {
                open_new = true;
            } else if (tcp && it->second.completed() && pkt.has_flag(tcp_flag::SYN) &&
                       !pkt.has_flag(tcp_flag::ACK)) {
                open_new = true;
            }
        }

        if (open_new) {
            Session s;
            s.key = key;
            s.initiator = pkt.source();
            s.session_index = next_index[key]++;
            sessions.push_back(std::move(s));
            it = active.insert_or_assign(key, ActiveFlow{sessions.size() - 1}).first;
        }

        ActiveFlow& flow = it->second;
        Session& s = sessions[flow.session];
        const Direction dir = pkt.source() == s.initiator ? Direction::Forward : Direction::Backward;
        if (tcp) {
            if (pkt.has_flag(tcp_flag::FIN)) (dir == Direction::Forward ? flow.fin_forward : flow.fin_backward) = true;
            if (pkt.has_flag(tcp_flag::RST)) flow.reset = true;
        }
        s.total_payload_bytes += pkt.payload.size();
        s.packets.push_back({pkt, dir});
    }
    return sessions;
}

} // namespace mtc::capture
