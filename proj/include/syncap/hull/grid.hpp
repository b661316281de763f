#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace syncap::hull {

/// Axis-aligned voxel grid. Voxel (i, j, k) has center
/// origin + (index + 0.5) * edge, per axis; storage is x-fastest.
struct VoxelGrid {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  std::array<int, 3> dims{0, 0, 0};
  Eigen::Vector3d edge = Eigen::Vector3d::Zero();
  std::vector<std::uint8_t> occupancy;
  std::vector<std::uint16_t> support;  // cameras whose silhouette holds the voxel center

  std::size_t size() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]);
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(dims[1]) + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(dims[0]) +
           static_cast<std::size_t>(i);
  }
  bool inside(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }
  Eigen::Vector3d center(int i, int j, int k) const {
    return origin + Eigen::Vector3d((i + 0.5) * edge.x(), (j + 0.5) * edge.y(), (k + 0.5) * edge.z());
  }
  bool occupied(int i, int j, int k) const { return inside(i, j, k) && occupancy[index(i, j, k)] != 0; }

  double voxel_volume() const { return edge.prod(); }
  std::size_t occupied_count() const;
  double occupied_volume() const { return static_cast<double>(occupied_count()) * voxel_volume(); }
};

/// Grid of `dims` voxels spanning `extent` meters, centered on `hip`.
/// Throws BadDims for non-positive extents or dims.
VoxelGrid build_grid(const Eigen::Vector3d& hip, const Eigen::Vector3d& extent, const std::array<int, 3>& dims);

inline const Eigen::Vector3d kDefaultExtent{1.8, 1.8, 1.9};
inline constexpr std::array<int, 3> kDefaultDims{160, 160, 160};

}  // namespace syncap::hull
