#include "syncap/dataplane/record.hpp"

#include <algorithm>

#include "syncap/common/bytes.hpp"
#include "syncap/common/error.hpp"
#include "syncap/dataplane/crc32.hpp"

namespace syncap::dataplane {

const char* to_string(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::Image: return "IMAGE";
    case PayloadKind::Joints2D: return "JOINTS2D";
    case PayloadKind::Silhouette: return "SILHOUETTE";
  }
  return "?";
}

CaptureRecord& seal(CaptureRecord& record) {
  record.checksum = crc32(record.payload);
  return record;
}

std::vector<std::uint8_t> serialize_record(const CaptureRecord& r) {
  if (r.payload.size() > kMaxPayloadBytes) fail(ErrorCode::PayloadTooLarge, "payload above 16 MiB");
  std::vector<std::uint8_t> out;
  out.reserve(kRecordOverhead + r.payload.size());
  ByteWriter w(out);
  w.bytes(kRecordMagic);
  w.u8(kRecordVersion);
  w.u16(r.device);
  w.u32(r.trigger_id);
  w.i64(r.capture_time_ns);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) w.f64(r.pose.rotation(i, j));
    w.f64(r.pose.translation[i]);
  }
  const auto& k = r.intrinsics;
  for (double v : {k.fx, k.fy, k.cx, k.cy, k.width, k.height}) w.f64(v);
  w.u8(static_cast<std::uint8_t>(r.kind));
  w.u32(static_cast<std::uint32_t>(r.payload.size()));
  w.bytes(r.payload);
  w.u32(r.checksum);
  return out;
}

CaptureRecord deserialize_record(std::span<const std::uint8_t> bytes) {
  ByteReader rd(bytes);
  const auto magic = rd.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kRecordMagic.begin())) fail(ErrorCode::BadMagic, "not a capture record");
  if (rd.u8() != kRecordVersion) fail(ErrorCode::BadMagic, "unsupported record version");

  CaptureRecord r;
  r.device = rd.u16();
  r.trigger_id = rd.u32();
  r.capture_time_ns = rd.i64();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r.pose.rotation(i, j) = rd.f64();
    r.pose.translation[i] = rd.f64();
  }
  auto& k = r.intrinsics;
  for (double* v : {&k.fx, &k.fy, &k.cx, &k.cy, &k.width, &k.height}) *v = rd.f64();
  const auto kind = rd.u8();
  if (kind < 1 || kind > 3) fail(ErrorCode::InvalidArgument, "unknown payload kind");
  r.kind = static_cast<PayloadKind>(kind);
  const auto len = rd.u32();
  if (len > kMaxPayloadBytes) fail(ErrorCode::PayloadTooLarge, "payload above 16 MiB");
  const auto payload = rd.bytes(len);
  r.payload.assign(payload.begin(), payload.end());
  r.checksum = rd.u32();
  if (rd.remaining() != 0) fail(ErrorCode::InvalidArgument, "trailing bytes after record");
  if (crc32(r.payload) != r.checksum) fail(ErrorCode::ChecksumMismatch, "payload checksum mismatch");
  return r;
}

}  // namespace syncap::dataplane
