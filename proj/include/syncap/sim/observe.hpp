#pragma once

#include "syncap/common/rng.hpp"
#include "syncap/geometry/camera.hpp"
#include "syncap/geometry/mask.hpp"
#include "syncap/geometry/skeleton.hpp"
#include "syncap/sim/actor.hpp"

namespace syncap::sim {

struct DetectorNoise {
  double pixel_sigma = 0.0;
  double miss_rate = 0.0;  // whole-actor miss-detection probability
  double confidence = 1.0;
};

/// Simulated 2D detector: projects every joint through the true camera, adds
/// i.i.d. Gaussian pixel noise, and with probability miss_rate reports the
/// whole actor MISSING. Joints behind the camera or outside the frame are
/// MISSING. Draws are taken in a fixed order so equal seeds give equal output.
geometry::Skeleton2D observe_joints(const geometry::Skeleton3D& truth, const geometry::Camera& camera,
                                    const DetectorNoise& noise, Rng& rng, std::size_t camera_index = 0);

/// Conservative capsule silhouette: a pixel is set when its center ray passes
/// within radius + (pixel footprint at the capsule's far depth) of a bone, so
/// every point of every capsule lands on a set pixel.
geometry::Mask render_silhouette(const std::vector<Capsule>& capsules, const geometry::Camera& camera);

}  // namespace syncap::sim
