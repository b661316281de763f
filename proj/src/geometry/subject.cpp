#include "syncap/geometry/subject.hpp"

#include <algorithm>

#include "syncap/common/error.hpp"

namespace syncap::geometry {

double subject_score(const BoundingBox& box, double frame_width, double frame_height) {
  const Eigen::Vector2d frame_center(0.5 * frame_width, 0.5 * frame_height);
  const double distance = (box.center() - frame_center).norm();
  return box.area() / std::max(distance, kCenterDistanceFloorPx);
}

SubjectChoice select_subject(std::span<const Detection> detections, double frame_width, double frame_height) {
  if (detections.empty()) fail(ErrorCode::NoDetections, "no skeleton detected");
  SubjectChoice best{0, subject_score(detections[0].box, frame_width, frame_height)};
  for (std::size_t i = 1; i < detections.size(); ++i) {
    const double score = subject_score(detections[i].box, frame_width, frame_height);
    if (score > best.score) best = {i, score};
  }
  return best;
}

}  // namespace syncap::geometry
