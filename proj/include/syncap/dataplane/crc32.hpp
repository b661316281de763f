#pragma once

#include <cstdint>
#include <span>

namespace syncap::dataplane {

// CRC-32 with the IEEE 802.3 polynomial (zlib's crc32).
std::uint32_t crc32(std::span<const std::uint8_t> data);

}  // namespace syncap::dataplane
