#include "syncap/hull/carve.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "syncap/common/error.hpp"

namespace syncap::hull {

namespace {

unsigned worker_count(unsigned requested, int slabs) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::min<unsigned>(n, static_cast<unsigned>(std::max(1, slabs)));
}

}  // namespace

int default_threshold(std::size_t cameras) { return std::max(1, static_cast<int>(cameras) - 1); }

void apply_threshold(VoxelGrid& grid, int threshold) {
  if (threshold < 1) fail(ErrorCode::InvalidArgument, "threshold must be at least 1");
  for (std::size_t v = 0; v < grid.size(); ++v) grid.occupancy[v] = grid.support[v] >= threshold ? 1 : 0;
}

void carve(VoxelGrid& grid, std::span<const Silhouette> silhouettes, int threshold, unsigned threads) {
  if (silhouettes.empty()) fail(ErrorCode::NoSilhouettes, "carving needs at least one silhouette");
  if (threshold < 1 || static_cast<std::size_t>(threshold) > silhouettes.size())
    fail(ErrorCode::InvalidArgument, "threshold must lie in [1, cameras]");
  if (grid.size() == 0) fail(ErrorCode::BadDims, "empty grid");
  grid.support.assign(grid.size(), 0);
  grid.occupancy.assign(grid.size(), 0);

  std::vector<Eigen::Matrix<double, 3, 4>> proj;
  for (const auto& s : silhouettes) {
    Eigen::Matrix<double, 3, 4> rt;
    rt.leftCols<3>() = s.camera.pose.rotation.transpose();
    rt.col(3) = -s.camera.pose.rotation.transpose() * s.camera.pose.translation;
    proj.push_back(s.camera.intrinsics.matrix() * rt);
  }

  auto slab = [&](int k0, int k1) {
    for (int k = k0; k < k1; ++k)
      for (int j = 0; j < grid.dims[1]; ++j)
        for (int i = 0; i < grid.dims[0]; ++i) {
          const Eigen::Vector4d x = grid.center(i, j, k).homogeneous();
          std::uint16_t n = 0;
          for (std::size_t c = 0; c < silhouettes.size(); ++c) {
            const Eigen::Vector3d h = proj[c] * x;
            if (!(h.z() > geometry::kMinProjectionDepth)) continue;
            const double u = std::floor(h.x() / h.z()), v = std::floor(h.y() / h.z());
            const auto& m = silhouettes[c].mask;
            if (u < 0.0 || v < 0.0 || u >= m.width || v >= m.height) continue;
            n += m.at(static_cast<int>(u), static_cast<int>(v));
          }
          const std::size_t idx = grid.index(i, j, k);
          grid.support[idx] = n;
          grid.occupancy[idx] = n >= threshold ? 1 : 0;
        }
  };

  const int nz = grid.dims[2];
  const unsigned workers = worker_count(threads, nz);
  if (workers == 1) {
    slab(0, nz);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    const int k0 = static_cast<int>(static_cast<long>(nz) * w / workers);
    const int k1 = static_cast<int>(static_cast<long>(nz) * (w + 1) / workers);
    pool.emplace_back(slab, k0, k1);
  }
}

}  // namespace syncap::hull
