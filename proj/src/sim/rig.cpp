#include "syncap/sim/rig.hpp"

#include <cmath>
#include <numbers>

#include "syncap/common/rng.hpp"

namespace syncap::sim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Six fixed shake phases per camera, drawn from the rig seed.
std::array<double, 6> shake_phases(const Rig& rig, std::size_t c) {
  Rng rng = make_rng(rig.seed, "shake", c);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  std::array<double, 6> out{};
  for (auto& p : out) p = u(rng);
  return out;
}

}  // namespace

Rig ring_rig(std::size_t count, double radius, double height, std::uint64_t seed) {
  Rig rig;
  rig.seed = seed;
  for (std::size_t c = 0; c < count; ++c) {
    CameraSpec spec;
    spec.angle_deg = 360.0 * static_cast<double>(c) / static_cast<double>(count);
    spec.radius = radius;
    spec.height = height;
    rig.cameras.push_back(spec);
  }
  return rig;
}

Eigen::Matrix3d look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target) {
  const Eigen::Vector3d z = (target - eye).normalized();
  const Eigen::Vector3d x = z.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

geometry::Pose true_pose(const Rig& rig, std::size_t c, double t) {
  const CameraSpec& s = rig.cameras.at(c);
  double angle = s.angle_deg;
  if (s.motion == MotionClass::Moving) angle += s.sway_deg * std::sin(2.0 * std::numbers::pi * s.sway_hz * t);
  const double a = angle * kDeg;
  Eigen::Vector3d eye(s.radius * std::cos(a), s.radius * std::sin(a), s.height);
  Eigen::Matrix3d rot = look_at(eye, rig.target);

  if (s.shake_deg > 0.0 || s.shake_m > 0.0) {
    const auto ph = shake_phases(rig, c);
    const double w = 2.0 * std::numbers::pi * s.shake_hz * t;
    // incommensurate multiples keep the shake from looking like a single sinusoid
    const Eigen::Vector3d tilt(std::sin(w + ph[0]), std::sin(1.37 * w + ph[1]), std::sin(0.71 * w + ph[2]));
    const Eigen::Vector3d shift(std::sin(1.13 * w + ph[3]), std::sin(0.89 * w + ph[4]), std::sin(1.61 * w + ph[5]));
    // evaluate both at t and subtract t = 0 so the shake does not move the t = 0 pose
    const Eigen::Vector3d tilt0(std::sin(ph[0]), std::sin(ph[1]), std::sin(ph[2]));
    const Eigen::Vector3d shift0(std::sin(ph[3]), std::sin(ph[4]), std::sin(ph[5]));
    const Eigen::Vector3d dr = s.shake_deg * kDeg * (tilt - tilt0) / 2.0;
    if (dr.norm() > 0.0) rot = rot * geometry::axis_angle(dr, dr.norm());
    eye += s.shake_m * (shift - shift0) / 2.0;
  }
  return {rot, eye};
}

geometry::Camera true_camera(const Rig& rig, std::size_t c, double t) {
  return {rig.cameras.at(c).intrinsics, true_pose(rig, c, t)};
}

geometry::GlobalTransform global_transform(const Rig& rig, std::size_t c) { return {true_pose(rig, c, 0.0)}; }

geometry::Pose local_pose(const Rig& rig, std::size_t c, double t) {
  return global_transform(rig, c).localize(true_pose(rig, c, t));
}

}  // namespace syncap::sim
