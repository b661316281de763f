#include "syncap/geometry/skeleton.hpp"

#include <algorithm>
#include <string>

#include "syncap/common/error.hpp"

namespace syncap::geometry {

Skeleton2D Skeleton2D::missing(std::size_t joint_count, std::size_t frame, std::size_t camera) {
  Skeleton2D out;
  out.frame = frame;
  out.camera = camera;
  out.joints.assign(joint_count, std::nullopt);
  return out;
}

std::size_t Skeleton2D::present_count() const {
  return static_cast<std::size_t>(std::count_if(joints.begin(), joints.end(), [](const auto& j) { return j.has_value(); }));
}

std::size_t Skeleton3D::resolved_count() const {
  return static_cast<std::size_t>(std::count_if(joints.begin(), joints.end(), [](const auto& j) { return j.has_value(); }));
}

void validate(const Skeleton2D& skeleton, const Intrinsics& intrinsics, std::size_t joint_count, double margin_px) {
  if (skeleton.joints.size() != joint_count)
    fail(ErrorCode::InvalidArgument, "skeleton has " + std::to_string(skeleton.joints.size()) + " joints, expected " +
                                         std::to_string(joint_count));
  for (const auto& joint : skeleton.joints) {
    if (!joint) continue;
    if (!(joint->confidence >= 0.0 && joint->confidence <= 1.0))
      fail(ErrorCode::InvalidArgument, "joint confidence outside [0, 1]");
    const auto& p = joint->position;
    if (!p.allFinite() || p.x() < -margin_px || p.y() < -margin_px || p.x() > intrinsics.width + margin_px ||
        p.y() > intrinsics.height + margin_px)
      fail(ErrorCode::InvalidArgument, "joint outside the image bounds");
  }
}

Skeleton2D apply_confidence_threshold(const Skeleton2D& skeleton, double min_confidence) {
  Skeleton2D out = skeleton;
  for (auto& joint : out.joints)
    if (joint && joint->confidence < min_confidence) joint.reset();
  return out;
}

std::optional<BoundingBox> bounding_box(const Skeleton2D& skeleton) {
  std::optional<BoundingBox> box;
  for (const auto& joint : skeleton.joints) {
    if (!joint) continue;
    if (!box) {
      box = BoundingBox{joint->position, joint->position};
    } else {
      box->min = box->min.cwiseMin(joint->position);
      box->max = box->max.cwiseMax(joint->position);
    }
  }
  return box;
}

}  // namespace syncap::geometry
