#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "syncap/geometry/camera.hpp"

namespace syncap::sim {

enum class MotionClass { Static, Moving };

struct CameraSpec {
  double angle_deg = 0.0;  // position on the ring
  double radius = 4.0;
  double height = 1.5;
  MotionClass motion = MotionClass::Static;
  double sway_deg = 0.0;  // MOVING: amplitude of travel along the ring
  double sway_hz = 0.1;
  double shake_deg = 0.0;  // handheld rotation shake amplitude
  double shake_m = 0.0;    // handheld translation shake amplitude
  double shake_hz = 1.5;
  geometry::Intrinsics intrinsics;
};

struct Rig {
  std::vector<CameraSpec> cameras;
  Eigen::Vector3d target{0.0, 0.0, 1.0};
  std::uint64_t seed = 0;  // shake phases

  std::size_t size() const { return cameras.size(); }
};

/// C cameras evenly spaced on a circle, all looking at the target.
Rig ring_rig(std::size_t count, double radius = 4.0, double height = 1.5, std::uint64_t seed = 0);

/// Camera-to-world rotation looking from eye to target, world +Z up.
Eigen::Matrix3d look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target);

/// True (noise-free) world pose of camera c at time t.
geometry::Pose true_pose(const Rig& rig, std::size_t c, double t);
geometry::Camera true_camera(const Rig& rig, std::size_t c, double t);

/// The device's SLAM frame is its pose at t = 0, so T_c is that pose and
/// the local pose starts at identity.
geometry::GlobalTransform global_transform(const Rig& rig, std::size_t c);
geometry::Pose local_pose(const Rig& rig, std::size_t c, double t);

}  // namespace syncap::sim
