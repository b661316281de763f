#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace syncap::dataplane {

inline constexpr std::array<std::uint8_t, 4> kFrameMagic{'S', 'C', 'F', 'R'};
inline constexpr std::size_t kFrameHeader = 8;
inline constexpr std::size_t kMaxFrameBody = (16u << 20) + 1024;

/// magic, u32 little-endian body length, body. Throws InvalidArgument for an
/// empty or oversized body.
std::vector<std::uint8_t> encode_frame(std::span<const std::uint8_t> body);

/// Incremental decoder. A frame is accepted only when the validator accepts
/// its body; otherwise the decoder skips one byte and scans for the next
/// magic, so corruption costs at most the frames it touches.
class FrameDecoder {
 public:
  using Validator = std::function<bool(std::span<const std::uint8_t>)>;

  explicit FrameDecoder(Validator validator = {}) : validator_(std::move(validator)) {}

  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete, valid body, or nullopt when more input is needed.
  std::optional<std::vector<std::uint8_t>> next();
  /// End of input: gives up on a partial frame and rescans what remains.
  void finish() { finished_ = true; }

  std::uint64_t skipped_bytes() const { return skipped_; }
  std::uint64_t rejected_frames() const { return rejected_; }
  std::size_t buffered() const { return buffer_.size(); }

 private:
  void skip(std::size_t n);

  Validator validator_;
  std::deque<std::uint8_t> buffer_;
  bool finished_ = false;
  std::uint64_t skipped_ = 0;
  std::uint64_t rejected_ = 0;
};

/// Validator that accepts bodies which deserialize as capture records.
bool is_valid_record_body(std::span<const std::uint8_t> body);

}  // namespace syncap::dataplane
