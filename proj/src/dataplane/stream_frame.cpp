#include "syncap/dataplane/stream_frame.hpp"

#include <algorithm>

#include "syncap/common/bytes.hpp"
#include "syncap/common/error.hpp"
#include "syncap/dataplane/record.hpp"

namespace syncap::dataplane {

std::vector<std::uint8_t> encode_frame(std::span<const std::uint8_t> body) {
  if (body.empty() || body.size() > kMaxFrameBody) fail(ErrorCode::InvalidArgument, "frame body size out of range");
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeader + body.size());
  ByteWriter w(out);
  w.bytes(kFrameMagic);
  w.u32(static_cast<std::uint32_t>(body.size()));
  w.bytes(body);
  return out;
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) { buffer_.insert(buffer_.end(), bytes.begin(), bytes.end()); }

void FrameDecoder::skip(std::size_t n) {
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(n));
  skipped_ += n;
}

std::optional<std::vector<std::uint8_t>> FrameDecoder::next() {
  while (true) {
    // scan to the next magic
    std::size_t at = 0;
    while (at + kFrameMagic.size() <= buffer_.size() &&
           !std::equal(kFrameMagic.begin(), kFrameMagic.end(), buffer_.begin() + static_cast<std::ptrdiff_t>(at)))
      ++at;
    if (at + kFrameMagic.size() > buffer_.size()) {
      // keep a possible magic prefix at the tail unless the input has ended
      const std::size_t keep = finished_ ? 0 : std::min(buffer_.size(), kFrameMagic.size() - 1);
      skip(buffer_.size() - keep);
      return std::nullopt;
    }
    if (at > 0) skip(at);
    if (buffer_.size() < kFrameHeader) {
      if (finished_) skip(buffer_.size());
      return std::nullopt;
    }
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(buffer_[4 + i]) << (8 * i);
    if (len == 0 || len > kMaxFrameBody) {
      skip(1);
      continue;
    }
    if (buffer_.size() < kFrameHeader + len) {
      if (!finished_) return std::nullopt;
      skip(1);
      continue;
    }
    std::vector<std::uint8_t> body(buffer_.begin() + kFrameHeader, buffer_.begin() + kFrameHeader + len);
    if (validator_ && !validator_(body)) {
      ++rejected_;
      skip(1);
      continue;
    }
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(kFrameHeader + len));
    return body;
  }
}

bool is_valid_record_body(std::span<const std::uint8_t> body) {
  try {
    deserialize_record(body);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace syncap::dataplane
