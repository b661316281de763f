#pragma once

#include <Eigen/Core>

#include "syncap/common/rng.hpp"
#include "syncap/geometry/camera.hpp"

namespace syncap::sim {

struct PoseNoise {
  double rotation_sigma_deg = 0.0;   // per step
  double translation_sigma_m = 0.0;  // per step, per axis
  double reversion = 0.0;            // 0: pure random walk; pulls the state back toward zero
};

/// SLAM drift as a seeded random walk in rotation-vector and translation
/// space: x_{k+1} = (1 - reversion) x_k + noise. Each step draws a rotation of
/// N(0, sigma) degrees about a uniformly random axis.
class PoseRandomWalk {
 public:
  PoseRandomWalk(PoseNoise noise, std::uint64_t seed);

  void step();
  const Eigen::Vector3d& rotation_vector() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  /// Current perturbation applied to a pose: R' = R Exp(r), t' = t + d,
  /// re-orthonormalized.
  geometry::Pose apply(const geometry::Pose& pose) const;

 private:
  PoseNoise noise_;
  Rng rng_;
  Eigen::Vector3d rotation_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

/// Nearest rotation in Frobenius norm (polar decomposition), det +1.
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m);

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& w);
Eigen::Vector3d log_so3(const Eigen::Matrix3d& r);

}  // namespace syncap::sim
