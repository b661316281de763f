#include "syncap/hull/grid.hpp"

#include <algorithm>

#include "syncap/common/error.hpp"

namespace syncap::hull {

std::size_t VoxelGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count_if(occupancy.begin(), occupancy.end(), [](auto v) { return v != 0; }));
}

VoxelGrid build_grid(const Eigen::Vector3d& hip, const Eigen::Vector3d& extent, const std::array<int, 3>& dims) {
  for (int a = 0; a < 3; ++a) {
    if (!(extent[a] > 0.0)) fail(ErrorCode::BadDims, "grid extent must be positive");
    if (dims[a] <= 0) fail(ErrorCode::BadDims, "grid dims must be positive");
  }
  VoxelGrid g;
  g.dims = dims;
  g.edge = Eigen::Vector3d(extent.x() / dims[0], extent.y() / dims[1], extent.z() / dims[2]);
  g.origin = hip - 0.5 * extent;
  g.occupancy.assign(g.size(), 0);
  g.support.assign(g.size(), 0);
  return g;
}

}  // namespace syncap::hull
