#include "syncap/geometry/camera.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "syncap/common/error.hpp"

namespace syncap::geometry {

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) fail(ErrorCode::InvalidArgument, "focal lengths must be positive");
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height))
    fail(ErrorCode::InvalidArgument, "principal point outside the sensor");
}

Pose Pose::inverse() const {
  Pose out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

double orthonormality_error(const Eigen::Matrix3d& rotation) {
  return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
}

bool is_rotation(const Eigen::Matrix3d& rotation, double tolerance) {
  if (!rotation.allFinite()) return false;
  return orthonormality_error(rotation) <= tolerance && rotation.determinant() > 0.0;
}

std::optional<Eigen::Vector2d> try_project(const Eigen::Vector3d& point, const Camera& camera) {
  const Eigen::Vector3d local = camera.pose.to_local(point);
  if (!(local.z() > kMinProjectionDepth)) return std::nullopt;
  const auto& k = camera.intrinsics;
  return Eigen::Vector2d(k.fx * local.x() / local.z() + k.cx, k.fy * local.y() / local.z() + k.cy);
}

Eigen::Vector2d project(const Eigen::Vector3d& point, const Camera& camera) {
  if (!point.allFinite()) fail(ErrorCode::InvalidArgument, "point is not finite");
  auto pixel = try_project(point, camera);
  if (!pixel) fail(ErrorCode::DegenerateProjection, "point at or behind the camera plane");
  return *pixel;
}

double pair_angle(const Pose& a, const Pose& b) {
  const double cosine = std::clamp(a.normal().normalized().dot(b.normal().normalized()), -1.0, 1.0);
  return std::acos(cosine) * 180.0 / std::numbers::pi;
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle_rad) {
  const double n = axis.norm();
  if (n == 0.0 || angle_rad == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle_rad, axis / n).toRotationMatrix();
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

}  // namespace syncap::geometry
