#pragma once

#include <cstddef>
#include <span>

#include "syncap/geometry/skeleton.hpp"

namespace syncap::geometry {

struct Detection {
  Skeleton2D skeleton;
  BoundingBox box;
};

struct SubjectChoice {
  std::size_t index = 0;
  double score = 0.0;
};

inline constexpr double kCenterDistanceFloorPx = 1.0;

/// area(box) / max(distance(box center, frame center), kCenterDistanceFloorPx)
double subject_score(const BoundingBox& box, double frame_width, double frame_height);

/// Picks the detection with the highest score; the lowest index wins ties.
/// Throws NoDetections on an empty list.
SubjectChoice select_subject(std::span<const Detection> detections, double frame_width, double frame_height);

}  // namespace syncap::geometry
