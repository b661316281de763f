#include "syncap/dataplane/crc32.hpp"

#include <algorithm>
#include <limits>

#include <zlib.h>

namespace syncap::dataplane {

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  while (!data.empty()) {
    const auto n = std::min<std::size_t>(data.size(), std::numeric_limits<uInt>::max());
    crc = ::crc32(crc, data.data(), static_cast<uInt>(n));
    data = data.subspan(n);
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace syncap::dataplane
