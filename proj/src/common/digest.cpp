#include "mtc/common/digest.hpp"

#include <algorithm>

#include <openssl/sha.h>
#include <zlib.h>

namespace mtc {

Digest128 digest128(std::span<const std::uint8_t> data) {
    std::uint8_t full[SHA256_DIGEST_LENGTH];
    SHA256(data.data(), data.size(), full);
    Digest128 out;
    std::copy(full, full + out.size(), out.begin());
    return out;
}

Digest128 digest128(std::string_view data) {
    return digest128({reinterpret_cast<const std::uint8_t*>(data.data()), data.size()});
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(kHex[b >> 4]);
        s.push_back(kHex[b & 0xf]);
    }
    return s;
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks for very large buffers
    std::size_t off = 0;
    while (off < data.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - off, 1u << 30));
        crc = ::crc32(crc, data.data() + off, chunk);
        off += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

} // namespace mtc
