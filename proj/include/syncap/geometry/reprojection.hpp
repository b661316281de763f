#pragma once

#include <optional>
#include <span>
#include <vector>

#include "syncap/geometry/camera.hpp"
#include "syncap/geometry/skeleton.hpp"

namespace syncap::geometry {

struct ReprojectionReport {
  std::vector<std::optional<double>> per_joint;  // mean pixel distance over observing cameras
  std::vector<std::optional<double>> per_camera;
  double mean = 0.0;
  double rms = 0.0;
  std::size_t count = 0;  // evaluated (joint, camera) pairs
};

/// Pixel distance between each resolved joint's projection and its
/// observation, over every (joint, camera) pair where both exist. Pairs whose
/// projection is degenerate are skipped. Throws EmptyEvaluation when no pair
/// qualifies.
ReprojectionReport reprojection_error(const Skeleton3D& skeleton, std::span<const Skeleton2D> observations,
                                      std::span<const Camera> cameras);

}  // namespace syncap::geometry
