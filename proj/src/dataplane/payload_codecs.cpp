#include "syncap/dataplane/payload_codecs.hpp"

#include <cmath>
#include <limits>

#include "syncap/common/bytes.hpp"
#include "syncap/common/error.hpp"

namespace syncap::dataplane {

std::vector<std::uint8_t> encode_joints(const geometry::Skeleton2D& skeleton) {
  std::vector<std::uint8_t> out;
  out.reserve(skeleton.joints.size() * kJointBytes);
  ByteWriter w(out);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& j : skeleton.joints) {
    if (j) {
      w.f64(j->position.x());
      w.f64(j->position.y());
      w.f64(j->confidence);
    } else {
      w.f64(nan);
      w.f64(nan);
      w.f64(0.0);
    }
  }
  return out;
}

geometry::Skeleton2D decode_joints(std::span<const std::uint8_t> bytes, std::size_t joint_count) {
  if (bytes.size() % kJointBytes != 0) fail(ErrorCode::TruncatedInput, "partial joint in payload");
  if (bytes.size() / kJointBytes != joint_count)
    fail(ErrorCode::InvalidArgument, "expected " + std::to_string(joint_count) + " joints, got " +
                                         std::to_string(bytes.size() / kJointBytes));
  geometry::Skeleton2D s;
  ByteReader r(bytes);
  for (std::size_t m = 0; m < joint_count; ++m) {
    const double x = r.f64(), y = r.f64(), c = r.f64();
    if (std::isnan(x) || std::isnan(y))
      s.joints.emplace_back(std::nullopt);
    else
      s.joints.emplace_back(geometry::Joint2D{{x, y}, c});
  }
  return s;
}

std::vector<std::uint8_t> encode_silhouette(const geometry::Mask& mask) {
  if (mask.width < 0 || mask.height < 0 || mask.width > 0xFFFF || mask.height > 0xFFFF)
    fail(ErrorCode::InvalidArgument, "mask dimensions must fit in 16 bits");
  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  w.u16(static_cast<std::uint16_t>(mask.width));
  w.u16(static_cast<std::uint16_t>(mask.height));
  std::uint8_t value = 0;
  std::uint32_t run = 0;
  for (auto p : mask.pixels) {
    const std::uint8_t v = p ? 1 : 0;
    if (v != value) {
      w.u32(run);
      value = v;
      run = 0;
    }
    ++run;
  }
  w.u32(run);
  return out;
}

geometry::Mask decode_silhouette(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const int width = r.u16();
  const int height = r.u16();
  geometry::Mask mask(width, height);
  if (r.remaining() % 4 != 0) fail(ErrorCode::TruncatedInput, "partial run length");
  std::size_t at = 0;
  std::uint8_t value = 0;
  while (r.remaining() > 0) {
    const std::uint32_t run = r.u32();
    if (run > mask.pixels.size() - at) fail(ErrorCode::InvalidArgument, "runs overflow the mask");
    std::fill_n(mask.pixels.begin() + static_cast<std::ptrdiff_t>(at), run, value);
    at += run;
    value ^= 1;
  }
  if (at != mask.pixels.size()) fail(ErrorCode::InvalidArgument, "runs do not cover the mask");
  return mask;
}

}  // namespace syncap::dataplane
