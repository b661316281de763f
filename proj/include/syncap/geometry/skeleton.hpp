#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "syncap/geometry/camera.hpp"

namespace syncap::geometry {

// OpenPose BODY_25 ordering.
inline constexpr std::size_t kDefaultJointCount = 25;
inline constexpr std::size_t kMidHipJoint = 8;

struct Joint2D {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double confidence = 1.0;
};

struct Skeleton2D {
  std::size_t frame = 0;
  std::size_t camera = 0;
  std::vector<std::optional<Joint2D>> joints;  // nullopt == MISSING

  static Skeleton2D missing(std::size_t joint_count, std::size_t frame = 0, std::size_t camera = 0);

  std::size_t present_count() const;
  bool any_present() const { return present_count() > 0; }
};

struct Skeleton3D {
  std::size_t frame = 0;
  std::vector<std::optional<Eigen::Vector3d>> joints;  // nullopt == UNRESOLVED

  std::size_t resolved_count() const;
};

/// Throws InvalidArgument unless the skeleton has exactly `joint_count`
/// joints, confidences in [0, 1], and present joints inside the image
/// extended by `margin_px`.
void validate(const Skeleton2D& skeleton, const Intrinsics& intrinsics, std::size_t joint_count = kDefaultJointCount,
              double margin_px = 0.0);

/// Joints below `min_confidence` become MISSING.
Skeleton2D apply_confidence_threshold(const Skeleton2D& skeleton, double min_confidence);

struct BoundingBox {
  Eigen::Vector2d min = Eigen::Vector2d::Zero();
  Eigen::Vector2d max = Eigen::Vector2d::Zero();

  double area() const { return (max - min).prod(); }
  Eigen::Vector2d center() const { return 0.5 * (min + max); }
};

/// Box enclosing the present joints; nullopt when none is present.
std::optional<BoundingBox> bounding_box(const Skeleton2D& skeleton);

}  // namespace syncap::geometry
