#include "syncap/geometry/reprojection.hpp"

#include <cmath>

#include "syncap/common/error.hpp"

namespace syncap::geometry {

ReprojectionReport reprojection_error(const Skeleton3D& skeleton, std::span<const Skeleton2D> observations,
                                      std::span<const Camera> cameras) {
  if (observations.size() != cameras.size())
    fail(ErrorCode::InvalidArgument, "observation and camera counts differ");

  const std::size_t joint_count = skeleton.joints.size();
  std::vector<double> joint_sum(joint_count, 0.0), camera_sum(cameras.size(), 0.0);
  std::vector<std::size_t> joint_n(joint_count, 0), camera_n(cameras.size(), 0);

  ReprojectionReport report;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t m = 0; m < joint_count; ++m) {
    if (!skeleton.joints[m]) continue;
    for (std::size_t c = 0; c < cameras.size(); ++c) {
      const auto& joints = observations[c].joints;
      if (m >= joints.size() || !joints[m]) continue;
      auto pixel = try_project(*skeleton.joints[m], cameras[c]);
      if (!pixel) continue;
      const double d = (*pixel - joints[m]->position).norm();
      sum += d;
      sum_sq += d * d;
      joint_sum[m] += d;
      ++joint_n[m];
      camera_sum[c] += d;
      ++camera_n[c];
      ++report.count;
    }
  }
  if (report.count == 0) fail(ErrorCode::EmptyEvaluation, "no resolved joint has an observation");

  report.mean = sum / static_cast<double>(report.count);
  report.rms = std::sqrt(sum_sq / static_cast<double>(report.count));
  report.per_joint.resize(joint_count);
  for (std::size_t m = 0; m < joint_count; ++m)
    if (joint_n[m] > 0) report.per_joint[m] = joint_sum[m] / static_cast<double>(joint_n[m]);
  report.per_camera.resize(cameras.size());
  for (std::size_t c = 0; c < cameras.size(); ++c)
    if (camera_n[c] > 0) report.per_camera[c] = camera_sum[c] / static_cast<double>(camera_n[c]);
  return report;
}

}  // namespace syncap::geometry
