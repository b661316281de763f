#include "syncap/sim/pose_noise.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace syncap::sim {

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& w) {
  const double a = w.norm();
  if (a < 1e-15) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(a, w / a).toRotationMatrix();
}

Eigen::Vector3d log_so3(const Eigen::Matrix3d& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
  return u * v.transpose();
}

PoseRandomWalk::PoseRandomWalk(PoseNoise noise, std::uint64_t seed) : noise_(noise), rng_(seed) {}

void PoseRandomWalk::step() {
  std::normal_distribution<double> n(0.0, 1.0);
  // axis uniform on the sphere, signed angle N(0, sigma)
  Eigen::Vector3d axis(n(rng_), n(rng_), n(rng_));
  if (axis.norm() < 1e-12) axis = Eigen::Vector3d::UnitZ();
  const double angle = noise_.rotation_sigma_deg * std::numbers::pi / 180.0 * n(rng_);
  const Eigen::Vector3d dt(n(rng_), n(rng_), n(rng_));

  const double keep = 1.0 - noise_.reversion;
  rotation_ = log_so3(exp_so3(axis.normalized() * angle) * exp_so3(keep * rotation_));
  translation_ = keep * translation_ + noise_.translation_sigma_m * dt;
}

geometry::Pose PoseRandomWalk::apply(const geometry::Pose& pose) const {
  return {orthonormalize(pose.rotation * exp_so3(rotation_)), pose.translation + translation_};
}

}  // namespace syncap::sim
