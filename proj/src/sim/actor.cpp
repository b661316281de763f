#include "syncap/sim/actor.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "syncap/common/error.hpp"
#include "syncap/geometry/camera.hpp"

namespace syncap::sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum Body : std::size_t {
  Nose, Neck, RShoulder, RElbow, RWrist, LShoulder, LElbow, LWrist, MidHip, RHip, RKnee, RAnkle,
  LHip, LKnee, LAnkle, REye, LEye, REar, LEar, LBigToe, LSmallToe, LHeel, RBigToe, RSmallToe, RHeel,
};

double motion_angle(const JointMotion& m, double f0, double t) {
  const double w = kTwoPi * m.harmonic * f0 * t;
  if (m.shape == JointMotion::Shape::Raised) return m.amplitude * 0.5 * (1.0 - std::cos(w));
  return m.amplitude * std::sin(w + m.phase);
}

}  // namespace

void ActorModel::validate() const {
  const std::size_t n = parent.size();
  if (n == 0 || offset.size() != n || radius.size() != n) fail(ErrorCode::InvalidArgument, "actor tables differ in size");
  std::size_t roots = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (parent[j] == kNoParent) {
      ++roots;
      continue;
    }
    if (parent[j] >= n) fail(ErrorCode::InvalidArgument, "parent index out of range");
    // walking up must terminate within n steps
    std::size_t k = j, steps = 0;
    while (parent[k] != kNoParent && steps++ <= n) k = parent[k];
    if (steps > n) fail(ErrorCode::InvalidArgument, "kinematic cycle");
  }
  if (roots != 1) fail(ErrorCode::InvalidArgument, "actor needs exactly one root");
  for (const auto& m : script)
    if (m.joint >= n || parent[m.joint] == kNoParent) fail(ErrorCode::InvalidArgument, "script targets a bad joint");
  if (!(base_frequency > 0.0)) fail(ErrorCode::InvalidArgument, "base frequency must be positive");
}

ActorModel rest_actor() {
  ActorModel a;
  a.parent.assign(25, kNoParent);
  a.offset.assign(25, Eigen::Vector3d::Zero());
  a.radius.assign(25, 0.0);

  // Actor faces +Y, its right is -X.
  auto bone = [&](std::size_t j, std::size_t p, Eigen::Vector3d o, double r) {
    a.parent[j] = p;
    a.offset[j] = o;
    a.radius[j] = r;
  };
  bone(Neck, MidHip, {0.0, 0.0, 0.5}, 0.15);
  bone(Nose, Neck, {0.0, 0.08, 0.15}, 0.09);
  bone(REye, Nose, {-0.035, 0.0, 0.04}, 0.03);
  bone(LEye, Nose, {0.035, 0.0, 0.04}, 0.03);
  bone(REar, REye, {-0.05, -0.06, -0.01}, 0.03);
  bone(LEar, LEye, {0.05, -0.06, -0.01}, 0.03);
  for (int side : {-1, 1}) {
    const double s = side;
    const bool right = side < 0;
    bone(right ? RShoulder : LShoulder, Neck, {s * 0.18, 0.0, 0.0}, 0.05);
    bone(right ? RElbow : LElbow, right ? RShoulder : LShoulder, {0.0, 0.0, -0.28}, 0.05);
    bone(right ? RWrist : LWrist, right ? RElbow : LElbow, {0.0, 0.0, -0.25}, 0.04);
    bone(right ? RHip : LHip, MidHip, {s * 0.1, 0.0, 0.0}, 0.08);
    bone(right ? RKnee : LKnee, right ? RHip : LHip, {0.0, 0.0, -0.42}, 0.07);
    bone(right ? RAnkle : LAnkle, right ? RKnee : LKnee, {0.0, 0.0, -0.40}, 0.05);
    const std::size_t ankle = right ? RAnkle : LAnkle;
    bone(right ? RBigToe : LBigToe, ankle, {s * 0.02, 0.15, -0.07}, 0.03);
    bone(right ? RSmallToe : LSmallToe, ankle, {s * 0.06, 0.13, -0.07}, 0.03);
    bone(right ? RHeel : LHeel, ankle, {0.0, -0.05, -0.07}, 0.03);
  }
  return a;
}

ActorModel default_actor(double base_frequency) {
  ActorModel a = rest_actor();
  a.base_frequency = base_frequency;
  a.root.circle_radius = 0.25;
  a.root.bob = 0.02;
  a.root.yaw_amplitude = 0.3;

  using Shape = JointMotion::Shape;
  const Eigen::Vector3d x = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d y = Eigen::Vector3d::UnitY();
  const double pi = std::numbers::pi;
  // Opposed arm and leg swing, knees and elbows bending one way only.
  a.script = {
      {RElbow, x, 0.5, 1, 0.0, Shape::Sine},   {LElbow, x, 0.5, 1, pi, Shape::Sine},
      {RWrist, x, -0.6, 1, 0.0, Shape::Raised}, {LWrist, x, -0.6, 1, 0.0, Shape::Raised},
      {RKnee, x, 0.35, 1, pi, Shape::Sine},    {LKnee, x, 0.35, 1, 0.0, Shape::Sine},
      {RAnkle, x, -0.5, 2, 0.0, Shape::Raised}, {LAnkle, x, -0.5, 2, 0.0, Shape::Raised},
      {RShoulder, y, 0.25, 1, 0.0, Shape::Sine}, {LShoulder, y, 0.25, 1, 0.0, Shape::Sine},
      {Nose, x, 0.15, 2, 0.0, Shape::Sine},
  };
  return a;
}

geometry::Skeleton3D actor_pose_at(double t, const ActorModel& actor, std::size_t frame) {
  const std::size_t n = actor.joint_count();
  const double f0 = actor.base_frequency;
  const double w = kTwoPi * f0 * t;

  std::vector<Eigen::Matrix3d> local(n, Eigen::Matrix3d::Identity());
  for (const auto& m : actor.script) {
    const double angle = motion_angle(m, f0, t);
    if (angle != 0.0) local[m.joint] = local[m.joint] * geometry::axis_angle(m.axis, angle);
  }

  // Root: circle passing through the rest position, bob and yaw.
  const auto& r = actor.root;
  const Eigen::Vector3d root_pos =
      r.rest + Eigen::Vector3d(r.circle_radius * (std::cos(w) - 1.0), r.circle_radius * std::sin(w), r.bob * std::sin(2.0 * w));
  const Eigen::Matrix3d root_rot = geometry::axis_angle(Eigen::Vector3d::UnitZ(), r.yaw_amplitude * std::sin(w));

  std::vector<Eigen::Matrix3d> world_rot(n);
  std::vector<Eigen::Vector3d> pos(n);
  std::vector<bool> done(n, false);
  auto solve = [&](auto&& self, std::size_t j) -> void {
    if (done[j]) return;
    const std::size_t p = actor.parent[j];
    if (p == kNoParent) {
      world_rot[j] = root_rot;
      pos[j] = root_pos;
    } else {
      self(self, p);
      // the bone's own rotation pivots at the parent joint
      const Eigen::Matrix3d frame_rot = world_rot[p] * local[j];
      pos[j] = pos[p] + frame_rot * actor.offset[j];
      world_rot[j] = frame_rot;
    }
    done[j] = true;
  };
  for (std::size_t j = 0; j < n; ++j) solve(solve, j);

  geometry::Skeleton3D s;
  s.frame = frame;
  s.joints.reserve(n);
  for (const auto& p : pos) s.joints.emplace_back(p);
  return s;
}

std::vector<Capsule> actor_capsules(const geometry::Skeleton3D& pose, const ActorModel& actor) {
  std::vector<Capsule> out;
  for (std::size_t j = 0; j < actor.joint_count(); ++j) {
    const std::size_t p = actor.parent[j];
    if (p == kNoParent || actor.radius[j] <= 0.0) continue;
    if (!pose.joints[j] || !pose.joints[p]) continue;
    out.push_back({*pose.joints[p], *pose.joints[j], actor.radius[j]});
  }
  return out;
}

std::vector<Eigen::Vector3d> capsule_samples(const std::vector<Capsule>& capsules, int per_capsule) {
  std::vector<Eigen::Vector3d> out;
  const int rings = std::max(2, per_capsule / 8);
  for (const auto& c : capsules) {
    const Eigen::Vector3d axis = c.b - c.a;
    Eigen::Vector3d dir = axis.norm() > 0.0 ? axis.normalized() : Eigen::Vector3d::UnitZ();
    Eigen::Vector3d u = dir.unitOrthogonal();
    Eigen::Vector3d v = dir.cross(u);
    for (int i = 0; i < rings; ++i) {
      const double s = static_cast<double>(i) / (rings - 1);
      const Eigen::Vector3d center = c.a + s * axis;
      out.push_back(center);
      for (int k = 0; k < 8; ++k) {
        const double a = kTwoPi * k / 8.0;
        out.push_back(center + c.radius * (std::cos(a) * u + std::sin(a) * v));
      }
    }
    // end caps
    out.push_back(c.a - c.radius * dir);
    out.push_back(c.b + c.radius * dir);
  }
  return out;
}

double segment_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

}  // namespace syncap::sim
