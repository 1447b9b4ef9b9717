#include "mtc/dataset/store.hpp"

#include <cstring>

#include "mtc/common/byte_io.hpp"
#include "mtc/common/error.hpp"

namespace mtc::dataset {

namespace {

constexpr char kMagic[4] = {'M', 'T', 'C', '1'};

void put_endpoint(ByteWriter& w, const capture::Endpoint& e) {
    w.put(e.addr.version);
    w.put_bytes(e.addr.bytes);
    w.put(e.port);
}

capture::Endpoint get_endpoint(ByteReader<CorruptStore>& r) {
    capture::Endpoint e;
    e.addr.version = r.get<std::uint8_t>();
    if (e.addr.version != 4 && e.addr.version != 6) throw CorruptStore("bad ip version");
    auto b = r.get_bytes(16);
    std::copy(b.begin(), b.end(), e.addr.bytes.begin());
    e.port = r.get<std::uint16_t>();
    return e;
}

void encode_session(ByteWriter& w, const LabeledSession& ls) {
    const auto& s = ls.session;
    w.put_bytes(ls.session_id);
    w.put(static_cast<std::uint8_t>(ls.label));
    w.put_string(ls.family);
    w.put_string(ls.source_dataset);
    w.put(static_cast<std::uint8_t>(s.key.transport));
    put_endpoint(w, s.key.a);
    put_endpoint(w, s.key.b);
    w.put(static_cast<std::uint8_t>(s.initiator == s.key.a ? 0 : 1));
    w.put(s.session_index);
    w.put(static_cast<std::uint32_t>(s.packets.size()));
    for (const auto& sp : s.packets) {
        const auto& p = sp.packet;
        w.put(p.timestamp_us);
        w.put(static_cast<std::uint8_t>(sp.direction));
        w.put(p.tcp_flags.value_or(0));
        w.put(p.caplen);
        w.put(p.wirelen);
        w.put(static_cast<std::uint32_t>(p.payload.size()));
        w.put_bytes(p.payload);
    }
}

LabeledSession decode_session(ByteReader<CorruptStore>& r) {
    LabeledSession ls;
    auto id = r.get_bytes(16);
    std::copy(id.begin(), id.end(), ls.session_id.begin());
    const auto label = r.get<std::uint8_t>();
    if (label > 1) throw CorruptStore("bad label");
    ls.label = static_cast<Label>(label);
    ls.family = r.get_string();
    ls.source_dataset = r.get_string();

    auto& s = ls.session;
    const auto transport = r.get<std::uint8_t>();
    if (transport != 6 && transport != 17) throw CorruptStore("bad transport");
    s.key.transport = static_cast<capture::Transport>(transport);
    s.key.a = get_endpoint(r);
    s.key.b = get_endpoint(r);
    const auto init = r.get<std::uint8_t>();
    if (init > 1) throw CorruptStore("bad initiator flag");
    s.initiator = init == 0 ? s.key.a : s.key.b;
    const capture::Endpoint responder = init == 0 ? s.key.b : s.key.a;
    s.session_index = r.get<std::uint32_t>();

    const auto count = r.get<std::uint32_t>();
    if (count == 0) throw CorruptStore("session without packets");
    // each packet needs at least 23 bytes; reject absurd counts before reserving
    if (count > r.remaining() / 23) throw CorruptStore("packet count exceeds record");
    s.packets.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        capture::SessionPacket sp;
        auto& p = sp.packet;
        p.timestamp_us = r.get<std::uint64_t>();
        const auto dir = r.get<std::uint8_t>();
        if (dir > 1) throw CorruptStore("bad direction");
        sp.direction = static_cast<capture::Direction>(dir);
        const auto flags = r.get<std::uint8_t>();
        p.caplen = r.get<std::uint32_t>();
        p.wirelen = r.get<std::uint32_t>();
        auto payload = r.get_bytes(r.get<std::uint32_t>());
        p.payload.assign(payload.begin(), payload.end());

        p.transport = s.key.transport;
        if (p.transport == capture::Transport::TCP) p.tcp_flags = flags;
        const auto& src = sp.direction == capture::Direction::Forward ? s.initiator : responder;
        const auto& dst = sp.direction == capture::Direction::Forward ? responder : s.initiator;
        p.ip_src = src.addr;
        p.port_src = src.port;
        p.ip_dst = dst.addr;
        p.port_dst = dst.port;
        s.total_payload_bytes += p.payload.size();
        s.packets.push_back(std::move(sp));
    }
    return ls;
}

} // namespace

std::vector<std::uint8_t> encode_corpus(const LabeledCorpus& corpus) {
    ByteWriter w;
    w.put_bytes({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
    w.put_string(corpus.dataset_name);
    for (const auto& ls : corpus.sessions) {
        ByteWriter rec;
        encode_session(rec, ls);
        w.put(static_cast<std::uint32_t>(rec.buffer().size()));
        w.put_bytes(rec.buffer());
    }
    w.put(crc32(w.buffer()));
    return std::move(w.buffer());
}

LabeledCorpus decode_corpus(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw CorruptStore("not a corpus store (bad magic)");
    const auto body = bytes.first(bytes.size() - 4);
    ByteReader<CorruptStore> tail(bytes.last(4));
    if (tail.get<std::uint32_t>() != crc32(body)) throw CorruptStore("corpus store checksum mismatch");

    ByteReader<CorruptStore> r(body.subspan(4));
    LabeledCorpus corpus;
    corpus.dataset_name = r.get_string();
    while (r.remaining() > 0) {
        const auto len = r.get<std::uint32_t>();
        ByteReader<CorruptStore> rec(r.get_bytes(len));
        corpus.sessions.push_back(decode_session(rec));
        if (rec.remaining() != 0) throw CorruptStore("trailing bytes in session record");
    }
    return corpus;
}

void save_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path) {
    write_file_bytes(path.string(), encode_corpus(corpus));
}

LabeledCorpus load_corpus(const std::filesystem::path& path) {
    return decode_corpus(read_file_bytes(path.string()));
}

} // namespace mtc::dataset
