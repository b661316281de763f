#include "syncap/sim/observe.hpp"

#include <random>

namespace syncap::sim {

geometry::Skeleton2D observe_joints(const geometry::Skeleton3D& truth, const geometry::Camera& camera,
                                    const DetectorNoise& noise, Rng& rng, std::size_t camera_index) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);

  geometry::Skeleton2D out = geometry::Skeleton2D::missing(truth.joints.size(), truth.frame, camera_index);
  const bool missed = u(rng) < noise.miss_rate;
  const auto& k = camera.intrinsics;
  for (std::size_t m = 0; m < truth.joints.size(); ++m) {
    // always consume both draws so a miss does not shift later frames
    const double dx = n(rng) * noise.pixel_sigma;
    const double dy = n(rng) * noise.pixel_sigma;
    if (missed || !truth.joints[m]) continue;
    const auto pixel = geometry::try_project(*truth.joints[m], camera);
    if (!pixel) continue;
    const Eigen::Vector2d p = *pixel + Eigen::Vector2d(dx, dy);
    if (p.x() < 0.0 || p.y() < 0.0 || p.x() >= k.width || p.y() >= k.height) continue;
    out.joints[m] = geometry::Joint2D{p, noise.confidence};
  }
  return out;
}

}  // namespace syncap::sim
