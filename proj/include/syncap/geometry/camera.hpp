#pragma once

#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace syncap::geometry {

/// Pinhole intrinsics without distortion. Pixel (u, v) covers [u, u+1) x [v, v+1).
struct Intrinsics {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  double width = 640.0;
  double height = 480.0;

  Eigen::Matrix3d matrix() const;

  // Throws InvalidArgument when fx/fy are not positive or the principal
  // point lies outside the sensor.
  void validate() const;

  bool operator==(const Intrinsics&) const = default;
};

/// Rigid camera-to-world pose. The camera looks along its local +Z axis,
/// +X is image right and +Y image down. A device-local pose is identity at
/// the first frame of a session.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }

  Pose inverse() const;

  // World-frame position of a camera-frame point.
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  // Camera-frame position of a world-frame point.
  Eigen::Vector3d to_local(const Eigen::Vector3d& p) const { return rotation.transpose() * (p - translation); }

  // Image-plane normal in world coordinates (the rotated viewing axis).
  Eigen::Vector3d normal() const { return rotation.col(2); }

  bool operator==(const Pose& other) const {
    return rotation == other.rotation && translation == other.translation;
  }
};

Pose compose(const Pose& a, const Pose& b);

/// Frobenius norm of R^T R - I.
double orthonormality_error(const Eigen::Matrix3d& rotation);

/// Orthonormal with determinant +1 within `tolerance`.
bool is_rotation(const Eigen::Matrix3d& rotation, double tolerance = 1e-9);

/// Rigid transform from a device's SLAM frame into the shared world frame,
/// fixed for the whole capture session.
struct GlobalTransform {
  Pose transform;

  Pose globalize(const Pose& local) const { return compose(transform, local); }
  Pose localize(const Pose& global) const { return compose(transform.inverse(), global); }
};

/// A camera in the shared world frame: intrinsics plus globalized pose.
struct Camera {
  Intrinsics intrinsics;
  Pose pose;

  bool operator==(const Camera&) const = default;
};

inline constexpr double kMinProjectionDepth = 1e-9;

/// Inhomogeneous pixel projection; throws DegenerateProjection when the
/// camera-frame depth is not above kMinProjectionDepth.
Eigen::Vector2d project(const Eigen::Vector3d& point, const Camera& camera);

/// Same as project() but returns nullopt instead of throwing.
std::optional<Eigen::Vector2d> try_project(const Eigen::Vector3d& point, const Camera& camera);

/// Angle in degrees between the image-plane normals of two cameras.
double pair_angle(const Pose& a, const Pose& b);

/// Rotation of `angle_rad` about a (not necessarily unit) axis.
Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle_rad);

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

}  // namespace syncap::geometry
