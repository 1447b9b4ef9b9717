#include "mtc/capture/pcap_writer.hpp"

#include "mtc/common/byte_io.hpp"

namespace mtc::capture {

namespace {

void put_be16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v >> 8));
    b.push_back(static_cast<std::uint8_t>(v));
}

void put_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    put_be16(b, static_cast<std::uint16_t>(v >> 16));
    put_be16(b, static_cast<std::uint16_t>(v));
}

} // namespace

std::vector<std::uint8_t> build_ethernet_frame(const ParsedPacket& pkt) {
    std::vector<std::uint8_t> l4;
    if (pkt.transport == Transport::TCP) {
        put_be16(l4, pkt.port_src);
        put_be16(l4, pkt.port_dst);
        put_be32(l4, 0); // seq
        put_be32(l4, 0); // ack
        l4.push_back(5 << 4);
        l4.push_back(pkt.tcp_flags.value_or(tcp_flag::ACK));
        put_be16(l4, 65535);
        put_be16(l4, 0);
        put_be16(l4, 0);
    } else {
        put_be16(l4, pkt.port_src);
        put_be16(l4, pkt.port_dst);
        put_be16(l4, static_cast<std::uint16_t>(8 + pkt.payload.size()));
        put_be16(l4, 0);
    }
    l4.insert(l4.end(), pkt.payload.begin(), pkt.payload.end());

    std::vector<std::uint8_t> f;
    const std::uint8_t dst_mac[6] = {0x02, 0, 0, 0, 0, 0x02};
    const std::uint8_t src_mac[6] = {0x02, 0, 0, 0, 0, 0x01};
    f.insert(f.end(), dst_mac, dst_mac + 6);
    f.insert(f.end(), src_mac, src_mac + 6);
    const auto proto = static_cast<std::uint8_t>(pkt.transport);
    if (pkt.ip_src.version == 6) {
        put_be16(f, 0x86dd);
        put_be32(f, 0x60000000);
        put_be16(f, static_cast<std::uint16_t>(l4.size()));
        f.push_back(proto);
        f.push_back(64);
        f.insert(f.end(), pkt.ip_src.bytes.begin(), pkt.ip_src.bytes.end());
        f.insert(f.end(), pkt.ip_dst.bytes.begin(), pkt.ip_dst.bytes.end());
    } else {
        put_be16(f, 0x0800);
        f.push_back(0x45);
        f.push_back(0);
        put_be16(f, static_cast<std::uint16_t>(20 + l4.size()));
        put_be16(f, 0);      // id
        put_be16(f, 0x4000); // DF
        f.push_back(64);
        f.push_back(proto);
        put_be16(f, 0);
        f.insert(f.end(), pkt.ip_src.bytes.begin(), pkt.ip_src.bytes.begin() + 4);
        f.insert(f.end(), pkt.ip_dst.bytes.begin(), pkt.ip_dst.bytes.begin() + 4);
    }
    f.insert(f.end(), l4.begin(), l4.end());
    return f;
}

PcapWriter::PcapWriter(std::uint16_t linktype) {
    ByteWriter w;
    w.put<std::uint32_t>(0xa1b2c3d4);
    w.put<std::uint16_t>(2);
    w.put<std::uint16_t>(4);
    w.put<std::int32_t>(0);
    w.put<std::uint32_t>(0);
    w.put<std::uint32_t>(262144);
    w.put<std::uint32_t>(linktype);
    buf_ = std::move(w.buffer());
}

void PcapWriter::add_frame(std::uint64_t timestamp_us, std::span<const std::uint8_t> frame,
                           std::uint32_t wirelen) {
    ByteWriter w;
    w.put(static_cast<std::uint32_t>(timestamp_us / 1'000'000));
    w.put(static_cast<std::uint32_t>(timestamp_us % 1'000'000));
    w.put(static_cast<std::uint32_t>(frame.size()));
    w.put(wirelen ? wirelen : static_cast<std::uint32_t>(frame.size()));
    w.put_bytes(frame);
    buf_.insert(buf_.end(), w.buffer().begin(), w.buffer().end());
}

void PcapWriter::add_packet(const ParsedPacket& pkt) {
    add_frame(pkt.timestamp_us, build_ethernet_frame(pkt));
}

void PcapWriter::save(const std::filesystem::path& path) const { write_file_bytes(path.string(), buf_); }

} // namespace mtc::capture
