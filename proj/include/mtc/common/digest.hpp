#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace mtc {

using Digest128 = std::array<std::uint8_t, 16>;

/// First 16 bytes of SHA-256 over `data`.
Digest128 digest128(std::span<const std::uint8_t> data);
Digest128 digest128(std::string_view data);

std::string to_hex(std::span<const std::uint8_t> bytes);

/// CRC-32 (IEEE, zlib polynomial).
std::uint32_t crc32(std::span<const std::uint8_t> data);

} // namespace mtc
