#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "syncap/hull/grid.hpp"

namespace syncap::hull {

struct SurfaceMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Eigen::Vector3d> normals;  // per vertex, area weighted
  bool empty_grid = false;               // set when there was nothing to mesh

  bool operator==(const SurfaceMesh&) const = default;
};

/// Marching cubes over the binary occupancy, with voxel centers as lattice
/// points and everything outside the grid treated as empty, so the surface
/// is closed. Vertices sit at lattice-edge midpoints; triangles wind
/// counter-clockwise seen from outside.
SurfaceMesh marching_cubes(const VoxelGrid& grid, unsigned threads = 0);

/// Enclosed volume by the divergence theorem.
double mesh_volume(const SurfaceMesh& mesh);

/// V - E + F.
long euler_characteristic(const SurfaceMesh& mesh);

/// Triangle list for each of the 256 corner configurations, as triples of
/// cube edge ids. Corner c sits at (c & 1, c >> 1 & 1, c >> 2 & 1).
const std::array<std::vector<std::array<std::uint8_t, 3>>, 256>& case_table();

}  // namespace syncap::hull
