#pragma once

#include <span>

#include "syncap/geometry/camera.hpp"
#include "syncap/geometry/mask.hpp"
#include "syncap/hull/grid.hpp"

namespace syncap::hull {

struct Silhouette {
  geometry::Mask mask;
  geometry::Camera camera;
};

/// Default camera-support threshold: one silhouette may be wrong.
int default_threshold(std::size_t cameras);

/// Counts, for every voxel center, the cameras whose mask holds the pixel
/// floor(projection); projections behind a camera or off the frame count as
/// outside. A voxel is occupied when its support reaches `threshold`.
/// Throws NoSilhouettes for an empty set and InvalidArgument for a threshold
/// outside [1, cameras]. Work is split over z slabs; `threads` 0 picks the
/// hardware concurrency.
void carve(VoxelGrid& grid, std::span<const Silhouette> silhouettes, int threshold, unsigned threads = 0);

/// Re-thresholds an already carved grid without re-projecting.
void apply_threshold(VoxelGrid& grid, int threshold);

}  // namespace syncap::hull
