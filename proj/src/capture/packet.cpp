#include "mtc/capture/packet.hpp"

#include <arpa/inet.h>

#include <stdexcept>

namespace mtc::capture {

IpAddress IpAddress::parse(const std::string& text) {
    IpAddress ip;
    if (text.find(':') != std::string::npos) {
        ip.version = 6;
        if (inet_pton(AF_INET6, text.c_str(), ip.bytes.data()) != 1)
            throw std::invalid_argument("bad IPv6 address: " + text);
    } else if (inet_pton(AF_INET, text.c_str(), ip.bytes.data()) != 1) {
        throw std::invalid_argument("bad IPv4 address: " + text);
    }
    return ip;
}

bool IpAddress::is_broadcast_or_multicast() const {
    if (version == 6) return bytes[0] == 0xff;
    // limited broadcast, 224/4 multicast, or a conventional x.x.x.255 subnet broadcast
    return (bytes[0] & 0xf0) == 0xe0 || bytes[3] == 0xff;
}

std::string IpAddress::to_string() const {
    char buf[INET6_ADDRSTRLEN] = {};
    inet_ntop(version == 6 ? AF_INET6 : AF_INET, bytes.data(), buf, sizeof buf);
    return buf;
}

} // namespace mtc::capture
