#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "syncap/geometry/camera.hpp"

namespace syncap::dataplane {

enum class PayloadKind : std::uint8_t { Image = 1, Joints2D = 2, Silhouette = 3 };

const char* to_string(PayloadKind kind);

/// D_{i,c}: what device c captured for trigger i, with the pose it had then.
struct CaptureRecord {
  std::uint16_t device = 0;
  std::uint32_t trigger_id = 0;
  std::int64_t capture_time_ns = 0;  // device clock
  geometry::Pose pose;                // globalized
  geometry::Intrinsics intrinsics;
  PayloadKind kind = PayloadKind::Image;
  std::vector<std::uint8_t> payload;
  std::uint32_t checksum = 0;  // CRC-32 of payload

  bool operator==(const CaptureRecord&) const = default;
};

inline constexpr std::array<std::uint8_t, 4> kRecordMagic{'C', 'R', 'E', 'C'};
inline constexpr std::uint8_t kRecordVersion = 1;
inline constexpr std::size_t kMaxPayloadBytes = 16u << 20;
// magic, version, device, trigger, time, 12 pose + 6 intrinsics doubles,
// kind, payload length, crc
inline constexpr std::size_t kRecordOverhead = 4 + 1 + 2 + 4 + 8 + 12 * 8 + 6 * 8 + 1 + 4 + 4;

/// Sets the checksum from the payload.
CaptureRecord& seal(CaptureRecord& record);

/// Fixed little-endian layout; the pose is the 3x4 [R|t] in row-major order.
/// Throws PayloadTooLarge above kMaxPayloadBytes.
std::vector<std::uint8_t> serialize_record(const CaptureRecord& record);

/// Exact inverse of serialize_record. Throws BadMagic (wrong magic or
/// version), TruncatedInput, PayloadTooLarge, ChecksumMismatch, and
/// InvalidArgument for trailing bytes or an unknown payload kind.
CaptureRecord deserialize_record(std::span<const std::uint8_t> bytes);

}  // namespace syncap::dataplane
