#include "syncap/dataplane/verify.hpp"

#include <cmath>
#include <numeric>

#include "syncap/common/error.hpp"
#include "syncap/dataplane/crc32.hpp"
#include "syncap/dataplane/payload_codecs.hpp"

namespace syncap::dataplane {

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::Checksum: return "checksum";
    case RejectReason::BadPose: return "bad_pose";
    case RejectReason::NonMonotonicTime: return "non_monotonic_time";
    case RejectReason::BadPayload: return "bad_payload";
    case RejectReason::Count_: break;
  }
  return "?";
}

std::uint64_t Verifier::rejected_total() const { return std::accumulate(rejected_.begin(), rejected_.end(), 0ull); }

namespace {

bool payload_ok(const CaptureRecord& r, std::size_t joint_count) {
  try {
    switch (r.kind) {
      case PayloadKind::Image:
        return !r.payload.empty();
      case PayloadKind::Joints2D: {
        const auto s = decode_joints(r.payload, joint_count);
        for (const auto& j : s.joints)
          if (j && (!std::isfinite(j->position.x()) || !std::isfinite(j->position.y()) || j->confidence < 0.0 ||
                    j->confidence > 1.0))
            return false;
        return true;
      }
      case PayloadKind::Silhouette: {
        const auto m = decode_silhouette(r.payload);
        return m.width == static_cast<int>(r.intrinsics.width) && m.height == static_cast<int>(r.intrinsics.height);
      }
    }
  } catch (const Error&) {
  }
  return false;
}

}  // namespace

Verdict Verifier::verify(const CaptureRecord& r) {
  auto reject = [&](RejectReason reason) {
    ++rejected_[static_cast<std::size_t>(reason)];
    return Verdict::rejected(reason);
  };
  if (crc32(r.payload) != r.checksum) return reject(RejectReason::Checksum);
  if (!r.pose.rotation.allFinite() || !r.pose.translation.allFinite() ||
      !geometry::is_rotation(r.pose.rotation, kPoseTolerance))
    return reject(RejectReason::BadPose);
  auto last = last_time_.find(r.device);
  if (last != last_time_.end() && r.capture_time_ns <= last->second) return reject(RejectReason::NonMonotonicTime);
  if (!payload_ok(r, joint_count_)) return reject(RejectReason::BadPayload);
  last_time_[r.device] = r.capture_time_ns;
  ++verified_;
  return Verdict::ok();
}

}  // namespace syncap::dataplane
