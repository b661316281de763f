#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "syncap/geometry/skeleton.hpp"

namespace syncap::sim {

inline constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

// One scripted joint rotation, applied at the joint's parent:
// angle(t) = amplitude * sin(2 pi h f0 t + phase)       (Sine)
// angle(t) = amplitude * (1 - cos(2 pi h f0 t)) / 2      (Raised, one-sided)
struct JointMotion {
  enum class Shape { Sine, Raised };
  std::size_t joint = 0;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
  double amplitude = 0.0;  // radians
  int harmonic = 1;
  double phase = 0.0;
  Shape shape = Shape::Sine;
};

struct RootMotion {
  Eigen::Vector3d rest{0.0, 0.0, 1.0};  // MidHip at t = 0
  double circle_radius = 0.0;          // horizontal drift on a circle through rest
  double bob = 0.0;                    // vertical, twice per period
  double yaw_amplitude = 0.0;          // radians
};

/// Kinematic tree with capsule bones. Joint j's bone runs from its parent to
/// it; offsets are expressed in the parent's frame at rest.
struct ActorModel {
  std::vector<std::size_t> parent;
  std::vector<Eigen::Vector3d> offset;
  std::vector<double> radius;  // capsule radius of the bone ending at joint j (0 for the root)
  double base_frequency = 0.5;  // Hz; every motion is periodic in 1/f0
  RootMotion root;
  std::vector<JointMotion> script;

  std::size_t joint_count() const { return parent.size(); }
  double period() const { return 1.0 / base_frequency; }
  double bone_length(std::size_t j) const { return offset[j].norm(); }

  // Throws InvalidArgument unless the parents form a tree rooted at one joint.
  void validate() const;
};

/// BODY_25 layout rooted at MidHip with a walking-in-place script.
ActorModel default_actor(double base_frequency = 0.5);

/// Same skeleton with no motion.
ActorModel rest_actor();

/// Forward kinematics at time t (seconds).
geometry::Skeleton3D actor_pose_at(double t, const ActorModel& actor, std::size_t frame = 0);

struct Capsule {
  Eigen::Vector3d a;
  Eigen::Vector3d b;
  double radius = 0.0;
};

/// One capsule per bone with positive radius.
std::vector<Capsule> actor_capsules(const geometry::Skeleton3D& pose, const ActorModel& actor);

/// Points spread over the capsule surfaces and axes, for containment checks.
std::vector<Eigen::Vector3d> capsule_samples(const std::vector<Capsule>& capsules, int per_capsule = 64);

/// Distance from p to segment ab.
double segment_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b);

}  // namespace syncap::sim
