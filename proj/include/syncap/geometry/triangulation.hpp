#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "syncap/geometry/camera.hpp"
#include "syncap/geometry/pairs.hpp"
#include "syncap/geometry/skeleton.hpp"

namespace syncap::geometry {

inline constexpr double kDltRankTolerance = 1e-10;

/// Two-view linear triangulation (DLT). Pixels are conditioned into
/// normalized camera coordinates and the world frame is re-centered on the
/// camera pair before the 4x4 system is solved by SVD.
///
/// Throws TriangulationDegenerate when the second-smallest singular value
/// falls below kDltRankTolerance relative to the largest (rays coincide or
/// are parallel) or the solution lies at infinity.
Eigen::Vector3d triangulate_pair(const Eigen::Vector2d& pixel_a, const Eigen::Vector2d& pixel_b, const Camera& camera_a,
                                 const Camera& camera_b);

struct PairPoint {
  CameraPair pair;
  Eigen::Vector3d point;
};

/// Per joint, every pairwise triangulation from valid pairs that observe it.
struct JointCloud {
  std::vector<std::vector<PairPoint>> joints;
};

/// Triangulates every joint present in both views of each valid pair.
/// Degenerate pairs are skipped. `observations[c]` belongs to `cameras[c]`.
JointCloud triangulate_cloud(std::span<const Skeleton2D> observations, std::span<const Camera> cameras,
                             std::span<const CameraPair> pairs);

struct JointInit {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  bool excluded = true;  // empty triangulation set; left out of bundle adjustment
};

/// Center of mass of each joint's triangulations; zero and excluded when a
/// joint has none.
std::vector<JointInit> centroid_init(const JointCloud& cloud);

}  // namespace syncap::geometry
