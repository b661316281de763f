#include "syncap/geometry/triangulation.hpp"

#include <Eigen/SVD>

#include "syncap/common/error.hpp"

namespace syncap::geometry {

namespace {

// Rows of x * P3 - P1 and y * P3 - P2 for normalized image coordinates, where
// P = [R^T | -R^T (C - origin)] maps shifted and scaled world points.
void add_rows(Eigen::Matrix4d& a, int row, const Eigen::Vector2d& pixel, const Camera& camera,
              const Eigen::Vector3d& origin, double scale) {
  const auto& k = camera.intrinsics;
  const double x = (pixel.x() - k.cx) / k.fx;
  const double y = (pixel.y() - k.cy) / k.fy;

  Eigen::Matrix<double, 3, 4> p;
  const Eigen::Matrix3d r = camera.pose.rotation.transpose();
  p.leftCols<3>() = r * scale;
  p.col(3) = -r * (camera.pose.translation - origin);

  a.row(row) = x * p.row(2) - p.row(0);
  a.row(row + 1) = y * p.row(2) - p.row(1);
  a.row(row).normalize();
  a.row(row + 1).normalize();
}

}  // namespace

Eigen::Vector3d triangulate_pair(const Eigen::Vector2d& pixel_a, const Eigen::Vector2d& pixel_b, const Camera& camera_a,
                                 const Camera& camera_b) {
  if (!pixel_a.allFinite() || !pixel_b.allFinite()) fail(ErrorCode::InvalidArgument, "pixel is not finite");

  const Eigen::Vector3d origin = 0.5 * (camera_a.pose.translation + camera_b.pose.translation);
  const double half_baseline = 0.5 * (camera_a.pose.translation - camera_b.pose.translation).norm();
  const double scale = half_baseline > 0.0 ? half_baseline : 1.0;

  Eigen::Matrix4d a;
  add_rows(a, 0, pixel_a, camera_a, origin, scale);
  add_rows(a, 2, pixel_b, camera_b, origin, scale);

  Eigen::JacobiSVD<Eigen::Matrix4d> svd(a, Eigen::ComputeFullV);
  const Eigen::Vector4d sigma = svd.singularValues();
  if (!(sigma(2) > kDltRankTolerance * sigma(0)))
    fail(ErrorCode::TriangulationDegenerate, "DLT system is rank deficient");

  const Eigen::Vector4d h = svd.matrixV().col(3);
  if (!(std::abs(h(3)) > 1e-12 * h.head<3>().norm()))
    fail(ErrorCode::TriangulationDegenerate, "triangulated point at infinity");

  const Eigen::Vector3d point = origin + scale * h.head<3>() / h(3);
  if (!point.allFinite()) fail(ErrorCode::TriangulationDegenerate, "non-finite triangulation");
  return point;
}

JointCloud triangulate_cloud(std::span<const Skeleton2D> observations, std::span<const Camera> cameras,
                             std::span<const CameraPair> pairs) {
  if (observations.size() != cameras.size())
    fail(ErrorCode::InvalidArgument, "observation and camera counts differ");

  std::size_t joint_count = 0;
  for (const auto& obs : observations) joint_count = std::max(joint_count, obs.joints.size());

  JointCloud cloud;
  cloud.joints.resize(joint_count);
  for (const auto& pair : pairs) {
    const auto& obs_a = observations[pair.first];
    const auto& obs_b = observations[pair.second];
    const std::size_t shared = std::min(obs_a.joints.size(), obs_b.joints.size());
    for (std::size_t m = 0; m < shared; ++m) {
      if (!obs_a.joints[m] || !obs_b.joints[m]) continue;
      try {
        cloud.joints[m].push_back({pair, triangulate_pair(obs_a.joints[m]->position, obs_b.joints[m]->position,
                                                          cameras[pair.first], cameras[pair.second])});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TriangulationDegenerate) throw;
      }
    }
  }
  return cloud;
}

std::vector<JointInit> centroid_init(const JointCloud& cloud) {
  std::vector<JointInit> init(cloud.joints.size());
  for (std::size_t m = 0; m < cloud.joints.size(); ++m) {
    const auto& points = cloud.joints[m];
    if (points.empty()) continue;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& p : points) sum += p.point;
    init[m] = {sum / static_cast<double>(points.size()), false};
  }
  return init;
}

}  // namespace syncap::geometry
