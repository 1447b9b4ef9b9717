#include "mtc/capture/pcap_reader.hpp"

#include <fstream>
#include <iterator>

#include "mtc/common/error.hpp"

namespace mtc::capture {

namespace {

constexpr std::uint32_t kPcapMicros = 0xa1b2c3d4;
constexpr std::uint32_t kPcapNanos = 0xa1b23c4d;
constexpr std::uint32_t kPcapMicrosSwapped = 0xd4c3b2a1;
constexpr std::uint32_t kPcapNanosSwapped = 0x4d3cb2a1;
constexpr std::uint32_t kPcapngSectionHeader = 0x0a0d0d0a;
constexpr std::uint32_t kPcapngByteOrder = 0x1a2b3c4d;
constexpr std::uint32_t kPcapngInterface = 0x00000001;
constexpr std::uint32_t kPcapngSimplePacket = 0x00000003;
constexpr std::uint32_t kPcapngEnhancedPacket = 0x00000006;

// anything larger is treated as a corrupt length field
constexpr std::uint32_t kMaxRecord = 256u << 20;

constexpr std::uint16_t kLinkNull = 0;
constexpr std::uint16_t kLinkEthernet = 1;
constexpr std::uint16_t kLinkRawBsd = 12;
constexpr std::uint16_t kLinkLoop = 108;
constexpr std::uint16_t kLinkRaw = 101;
constexpr std::uint16_t kLinkLinuxSll = 113;
constexpr std::uint16_t kLinkIpv4 = 228;
constexpr std::uint16_t kLinkIpv6 = 229;
constexpr std::uint16_t kLinkLinuxSll2 = 276;

constexpr std::uint16_t kEtherIpv4 = 0x0800;
constexpr std::uint16_t kEtherIpv6 = 0x86dd;

std::uint16_t be16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] << 8 | p[1]); }

std::uint32_t bswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xff00) | ((v << 8) & 0xff0000) | (v << 24);
}

std::uint16_t bswap16(std::uint16_t v) { return static_cast<std::uint16_t>((v >> 8) | (v << 8)); }

std::optional<ParsedPacket> decode_transport(std::span<const std::uint8_t> l4, std::uint8_t proto,
                                             ParsedPacket pkt, CaptureCounters& counters) {
    if (proto == 6) {
        if (l4.size() < 20) {
            ++counters.skipped_other;
            return std::nullopt;
        }
        const std::size_t hlen = static_cast<std::size_t>(l4[12] >> 4) * 4;
        if (hlen < 20 || hlen > l4.size()) {
            ++counters.skipped_other;
            return std::nullopt;
        }
        pkt.transport = Transport::TCP;
        pkt.port_src = be16(&l4[0]);
        pkt.port_dst = be16(&l4[2]);
        pkt.tcp_flags = l4[13];
        pkt.payload.assign(l4.begin() + static_cast<std::ptrdiff_t>(hlen), l4.end());
    } else if (proto == 17) {
        if (l4.size() < 8) {
            ++counters.skipped_other;
            return std::nullopt;
        }
        pkt.transport = Transport::UDP;
        pkt.port_src = be16(&l4[0]);
        pkt.port_dst = be16(&l4[2]);
        std::size_t end = l4.size();
        const std::size_t udp_len = be16(&l4[4]);
        if (udp_len >= 8 && udp_len < end) end = udp_len;
        pkt.payload.assign(l4.begin() + 8, l4.begin() + static_cast<std::ptrdiff_t>(end));
    } else {
        ++counters.skipped_other;
        return std::nullopt;
    }
    return pkt;
}

std::optional<ParsedPacket> decode_ipv4(std::span<const std::uint8_t> ip, ParsedPacket pkt,
                                        CaptureCounters& counters) {
    if (ip.size() < 20 || (ip[0] >> 4) != 4) {
        ++counters.skipped_other;
        return std::nullopt;
    }
    const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
    const std::size_t total = be16(&ip[2]);
    if (ihl < 20 || ihl > ip.size() || total < ihl) {
        ++counters.skipped_other;
        return std::nullopt;
    }
    if ((be16(&ip[6]) & 0x1fff) != 0) {
        ++counters.skipped_fragments;
        return std::nullopt;
    }
    // total length bounds the packet; trailing link padding is dropped
    const std::size_t end = std::min(total, ip.size());
    pkt.ip_src = IpAddress::v4(ip[12], ip[13], ip[14], ip[15]);
    pkt.ip_dst = IpAddress::v4(ip[16], ip[17], ip[18], ip[19]);
    return decode_transport(ip.subspan(ihl, end - ihl), ip[9], std::move(pkt), counters);
}

std::optional<ParsedPacket> decode_ipv6(std::span<const std::uint8_t> ip, ParsedPacket pkt,
                                        CaptureCounters& counters) {
    if (ip.size() < 40 || (ip[0] >> 4) != 6) {
        ++counters.skipped_other;
        return std::nullopt;
    }
    const std::size_t end = std::min<std::size_t>(40 + be16(&ip[4]), ip.size());
    pkt.ip_src.version = 6;
    pkt.ip_dst.version = 6;
    std::copy(ip.begin() + 8, ip.begin() + 24, pkt.ip_src.bytes.begin());
    std::copy(ip.begin() + 24, ip.begin() + 40, pkt.ip_dst.bytes.begin());

    std::uint8_t next = ip[6];
    std::size_t off = 40;
    for (;;) {
        if (next == 0 || next == 43 || next == 60 || next == 51 || next == 44) {
            if (off + 8 > end) {
                ++counters.skipped_other;
                return std::nullopt;
            }
            std::size_t len;
            if (next == 44) {
                if ((be16(&ip[off + 2]) >> 3) != 0) {
                    ++counters.skipped_fragments;
                    return std::nullopt;
                }
                len = 8;
            } else if (next == 51) {
                len = (static_cast<std::size_t>(ip[off + 1]) + 2) * 4;
            } else {
                len = (static_cast<std::size_t>(ip[off + 1]) + 1) * 8;
            }
            next = ip[off];
            off += len;
            if (off > end) {
                ++counters.skipped_other;
                return std::nullopt;
            }
            continue;
        }
        break;
    }
    return decode_transport(ip.subspan(off, end - off), next, std::move(pkt), counters);
}

} // namespace

std::optional<ParsedPacket> decode_frame(std::span<const std::uint8_t> frame, std::uint16_t linktype,
                                         std::uint64_t ts_us, std::uint32_t wirelen,
                                         CaptureCounters& counters) {
    ParsedPacket pkt;
    pkt.timestamp_us = ts_us;
    pkt.caplen = static_cast<std::uint32_t>(frame.size());
    pkt.wirelen = wirelen;

    std::size_t off = 0;
    int ipver = 0;
    auto from_ethertype = [&](std::uint16_t et) {
        if (et == kEtherIpv4) ipver = 4;
        else if (et == kEtherIpv6) ipver = 6;
    };

    switch (linktype) {
    case kLinkEthernet: {
        if (frame.size() < 14) break;
        std::uint16_t et = be16(&frame[12]);
        off = 14;
        while ((et == 0x8100 || et == 0x88a8 || et == 0x9100) && frame.size() >= off + 4) {
            et = be16(&frame[off + 2]);
            off += 4;
        }
        from_ethertype(et);
        break;
    }
    case kLinkRaw:
    case kLinkRawBsd:
        if (!frame.empty()) ipver = frame[0] >> 4;
        break;
    case kLinkIpv4:
        ipver = 4;
        break;
    case kLinkIpv6:
        ipver = 6;
        break;
    case kLinkLinuxSll:
        if (frame.size() >= 16) {
            from_ethertype(be16(&frame[14]));
            off = 16;
        }
        break;
    case kLinkLinuxSll2:
        if (frame.size() >= 20) {
            from_ethertype(be16(&frame[0]));
            off = 20;
        }
        break;
    case kLinkNull:
    case kLinkLoop:
        if (frame.size() >= 4) {
            std::uint32_t fam = static_cast<std::uint32_t>(frame[0]) | frame[1] << 8 | frame[2] << 16 |
                                static_cast<std::uint32_t>(frame[3]) << 24;
            if (fam > 0xffff) fam = bswap32(fam);
            if (fam == 2) ipver = 4;
            else if (fam == 24 || fam == 28 || fam == 30) ipver = 6;
            off = 4;
        }
        break;
    default:
        break;
    }

    if (ipver == 4) return decode_ipv4(frame.subspan(off), std::move(pkt), counters);
    if (ipver == 6) return decode_ipv6(frame.subspan(off), std::move(pkt), counters);
    ++counters.skipped_non_ip;
    return std::nullopt;
}

CaptureReader::CaptureReader(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnreadableFile("cannot open capture " + path.string());
    image_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    read_file_header();
}

CaptureReader::CaptureReader(std::vector<std::uint8_t> image) : image_(std::move(image)) {
    read_file_header();
}

std::uint16_t CaptureReader::rd16(std::size_t at) const {
    const std::uint16_t v = static_cast<std::uint16_t>(image_[at] | image_[at + 1] << 8);
    return swapped_ ? bswap16(v) : v;
}

std::uint32_t CaptureReader::rd32(std::size_t at) const {
    const std::uint32_t v = static_cast<std::uint32_t>(image_[at]) | image_[at + 1] << 8 |
                            image_[at + 2] << 16 | static_cast<std::uint32_t>(image_[at + 3]) << 24;
    return swapped_ ? bswap32(v) : v;
}

void CaptureReader::read_file_header() {
    if (image_.size() < 4) throw UnreadableFile("capture shorter than its magic number");
    swapped_ = false;
    const std::uint32_t magic = rd32(0);
    if (magic == kPcapngSectionHeader) {
        pcapng_ = true;
        read_pcapng_section_header(0);
        return;
    }
    switch (magic) {
    case kPcapMicros: break;
    case kPcapNanos: nanos_ = true; break;
    case kPcapMicrosSwapped: swapped_ = true; break;
    case kPcapNanosSwapped: swapped_ = nanos_ = true; break;
    default: throw UnreadableFile("not a pcap or pcapng file (bad magic)");
    }
    if (image_.size() < 24) throw UnreadableFile("truncated pcap file header");
    pcap_linktype_ = static_cast<std::uint16_t>(rd32(20) & 0xffff);
    pos_ = 24;
}

void CaptureReader::read_pcapng_section_header(std::size_t at) {
    if (image_.size() < at + 28) throw UnreadableFile("truncated pcapng section header");
    swapped_ = false;
    const std::uint32_t bom = rd32(at + 8);
    if (bom == bswap32(kPcapngByteOrder)) swapped_ = true;
    else if (bom != kPcapngByteOrder) throw UnreadableFile("bad pcapng byte-order magic");
    const std::uint32_t len = rd32(at + 4);
    if (len < 28 || len % 4 != 0 || at + len > image_.size())
        throw UnreadableFile("bad pcapng section header length");
    interfaces_.clear();
    pos_ = at + len;
}

std::optional<ParsedPacket> CaptureReader::next() {
    std::span<const std::uint8_t> frame;
    std::uint16_t linktype = 0;
    std::uint64_t ts = 0;
    std::uint32_t wirelen = 0;
    while (next_frame(frame, linktype, ts, wirelen)) {
        ++counters_.frames;
        if (auto pkt = decode_frame(frame, linktype, ts, wirelen, counters_)) {
            ++counters_.accepted;
            return pkt;
        }
    }
    return std::nullopt;
}

bool CaptureReader::next_frame(std::span<const std::uint8_t>& frame, std::uint16_t& linktype,
                               std::uint64_t& ts_us, std::uint32_t& wirelen) {
    return pcapng_ ? next_pcapng_frame(frame, linktype, ts_us, wirelen)
                   : next_pcap_frame(frame, linktype, ts_us, wirelen);
}

bool CaptureReader::next_pcap_frame(std::span<const std::uint8_t>& frame, std::uint16_t& linktype,
                                    std::uint64_t& ts_us, std::uint32_t& wirelen) {
    if (pos_ == image_.size()) return false;
    if (image_.size() - pos_ < 16) {
        ++counters_.truncated_records;
        pos_ = image_.size();
        return false;
    }
    const std::uint64_t sec = rd32(pos_);
    const std::uint64_t frac = rd32(pos_ + 4);
    const std::uint32_t incl = rd32(pos_ + 8);
    wirelen = rd32(pos_ + 12);
    if (incl > kMaxRecord || image_.size() - pos_ - 16 < incl) {
        ++counters_.truncated_records;
        pos_ = image_.size();
        return false;
    }
    ts_us = sec * 1'000'000 + (nanos_ ? frac / 1000 : frac);
    linktype = pcap_linktype_;
    frame = std::span<const std::uint8_t>(image_).subspan(pos_ + 16, incl);
    pos_ += 16 + incl;
    return true;
}

bool CaptureReader::next_pcapng_frame(std::span<const std::uint8_t>& frame, std::uint16_t& linktype,
                                      std::uint64_t& ts_us, std::uint32_t& wirelen) {
    for (;;) {
        if (pos_ == image_.size()) return false;
        if (image_.size() - pos_ < 12) {
            ++counters_.truncated_records;
            pos_ = image_.size();
            return false;
        }
        const std::uint32_t raw_type = rd32(pos_);
        if (raw_type == kPcapngSectionHeader) {
            // a new section may switch byte order
            read_pcapng_section_header(pos_);
            continue;
        }
        const std::uint32_t len = rd32(pos_ + 4);
        if (len < 12 || len % 4 != 0 || len > kMaxRecord || image_.size() - pos_ < len) {
            ++counters_.truncated_records;
            pos_ = image_.size();
            return false;
        }
        const std::size_t body = pos_ + 8;
        const std::size_t body_len = len - 12;
        pos_ += len;

        if (raw_type == kPcapngInterface) {
            if (body_len < 8) continue;
            Interface iface;
            iface.linktype = rd16(body);
            std::size_t opt = body + 8;
            const std::size_t opt_end = body + body_len;
            while (opt + 4 <= opt_end) {
                const std::uint16_t code = rd16(opt);
                const std::uint16_t olen = rd16(opt + 2);
                if (code == 0) break;
                if (code == 9 && olen >= 1 && opt + 5 <= opt_end) {
                    const std::uint8_t res = image_[opt + 4];
                    const unsigned exp = res & 0x7f;
                    std::uint64_t tps = 1;
                    for (unsigned i = 0; i < exp && tps < (1ULL << 62); ++i) tps *= (res & 0x80) ? 2 : 10;
                    iface.ticks_per_second = tps;
                }
                opt += 4 + ((olen + 3u) & ~3u);
            }
            interfaces_.push_back(iface);
        } else if (raw_type == kPcapngEnhancedPacket) {
            if (body_len < 20) continue;
            const std::uint32_t ifid = rd32(body);
            const std::uint64_t ticks = static_cast<std::uint64_t>(rd32(body + 4)) << 32 | rd32(body + 8);
            const std::uint32_t cap = rd32(body + 12);
            wirelen = rd32(body + 16);
            if (cap > body_len - 20) {
                ++counters_.truncated_records;
                pos_ = image_.size();
                return false;
            }
            const Interface iface = ifid < interfaces_.size() ? interfaces_[ifid] : Interface{};
            ts_us = static_cast<std::uint64_t>(static_cast<unsigned __int128>(ticks) * 1'000'000 /
                                               iface.ticks_per_second);
            linktype = iface.linktype;
            frame = std::span<const std::uint8_t>(image_).subspan(body + 20, cap);
            return true;
        } else if (raw_type == kPcapngSimplePacket) {
            if (body_len < 4) continue;
            wirelen = rd32(body);
            const std::size_t cap = std::min<std::size_t>(wirelen, body_len - 4);
            const Interface iface = interfaces_.empty() ? Interface{} : interfaces_.front();
            ts_us = 0;
            linktype = iface.linktype;
            frame = std::span<const std::uint8_t>(image_).subspan(body + 4, cap);
            return true;
        }
    }
}

CaptureContents parse_capture(const std::filesystem::path& path) {
    CaptureReader reader(path);
    CaptureContents out;
    while (auto pkt = reader.next()) out.packets.push_back(std::move(*pkt));
    out.counters = reader.counters();
    return out;
}

} // namespace mtc::capture
