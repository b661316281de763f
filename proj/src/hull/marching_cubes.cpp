#include "syncap/hull/marching_cubes.hpp"

#include <algorithm>
#include <set>
#include <thread>
#include <unordered_map>

#include <Eigen/Geometry>

namespace syncap::hull {

namespace {

using Table = std::array<std::vector<std::array<std::uint8_t, 3>>, 256>;

Eigen::Vector3i corner_offset(int c) { return {c & 1, (c >> 1) & 1, (c >> 2) & 1}; }

// Edge e joins corners kEdges[e][0] < kEdges[e][1]; kEdgeAxis[e] is the axis it runs along.
constexpr std::array<std::array<int, 2>, 12> kEdges{{
    {0, 1}, {2, 3}, {4, 5}, {6, 7},  // x
    {0, 2}, {1, 3}, {4, 6}, {5, 7},  // y
    {0, 4}, {1, 5}, {2, 6}, {3, 7},  // z
}};
constexpr std::array<int, 12> kEdgeAxis{0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2};

int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e)
    if ((kEdges[e][0] == a && kEdges[e][1] == b) || (kEdges[e][0] == b && kEdges[e][1] == a)) return e;
  return -1;
}

Eigen::Vector3d edge_midpoint(int e) {
  return 0.5 * (corner_offset(kEdges[e][0]).cast<double>() + corner_offset(kEdges[e][1]).cast<double>());
}

// Builds each case from the cube's faces: on every face, walking the corners
// counter-clockwise as seen from outside, an empty-to-occupied crossing is
// joined to the next crossing. That isolates occupied corners on ambiguous
// faces, and since the rule depends only on the face, neighbouring cells
// agree and the surface has no cracks. The segments chain into loops, which
// are fanned into triangles.
Table build_table() {
  // faces as corner cycles, oriented counter-clockwise from outside
  std::vector<std::array<int, 4>> faces;
  for (int axis = 0; axis < 3; ++axis)
    for (int side = 0; side < 2; ++side) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      auto corner = [&](int a, int b) { return (side << axis) | (a << u) | (b << v); };
      std::array<int, 4> cyc{corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)};
      // (u x v) is +axis; the outward normal is -axis on side 0
      if (side == 0) std::reverse(cyc.begin(), cyc.end());
      faces.push_back(cyc);
    }

  Table table;
  for (int cs = 0; cs < 256; ++cs) {
    auto occ = [&](int c) { return ((cs >> c) & 1) != 0; };
    std::array<int, 12> next;
    next.fill(-1);
    for (const auto& f : faces) {
      std::vector<std::pair<int, bool>> crossings;  // edge, entering the occupied side
      for (int i = 0; i < 4; ++i) {
        const int a = f[i], b = f[(i + 1) % 4];
        if (occ(a) != occ(b)) crossings.push_back({edge_between(a, b), occ(b)});
      }
      for (std::size_t i = 0; i < crossings.size(); ++i)
        if (crossings[i].second) next[crossings[i].first] = crossings[(i + 1) % crossings.size()].first;
    }
    std::array<bool, 12> used{};
    for (int start = 0; start < 12; ++start) {
      if (next[start] < 0 || used[start]) continue;
      std::vector<int> loop;
      for (int e = start; !used[e]; e = next[e]) {
        used[e] = true;
        loop.push_back(e);
      }
      for (std::size_t k = 1; k + 1 < loop.size(); ++k)
        table[cs].push_back({static_cast<std::uint8_t>(loop[0]), static_cast<std::uint8_t>(loop[k]),
                             static_cast<std::uint8_t>(loop[k + 1])});
    }
  }

  // Orient outward: in the one-corner case the normal must point away from corner 0.
  const auto& t = table[1].front();
  const Eigen::Vector3d n = (edge_midpoint(t[1]) - edge_midpoint(t[0])).cross(edge_midpoint(t[2]) - edge_midpoint(t[0]));
  if (n.sum() < 0.0)
    for (auto& tris : table)
      for (auto& tri : tris) std::swap(tri[1], tri[2]);
  return table;
}

struct Slab {
  std::vector<std::array<std::uint64_t, 3>> triangles;  // global edge keys
};

}  // namespace

const Table& case_table() {
  static const Table table = build_table();
  return table;
}

SurfaceMesh marching_cubes(const VoxelGrid& grid, unsigned threads) {
  SurfaceMesh mesh;
  if (grid.occupied_count() == 0) {
    mesh.empty_grid = true;
    return mesh;
  }
  const auto& table = case_table();
  const int nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];
  // lattice points run from -1 to n (padding), cells from -1 to n-1
  const std::uint64_t px = static_cast<std::uint64_t>(nx) + 2, py = static_cast<std::uint64_t>(ny) + 2;
  auto edge_key = [&](int i, int j, int k, int axis) {
    return ((static_cast<std::uint64_t>(k + 1) * py + static_cast<std::uint64_t>(j + 1)) * px +
            static_cast<std::uint64_t>(i + 1)) * 3 + static_cast<std::uint64_t>(axis);
  };

  auto run = [&](int k0, int k1, Slab& out) {
    for (int k = k0; k < k1; ++k)
      for (int j = -1; j < ny; ++j)
        for (int i = -1; i < nx; ++i) {
          int cs = 0;
          for (int c = 0; c < 8; ++c)
            if (grid.occupied(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1))) cs |= 1 << c;
          if (cs == 0 || cs == 255) continue;
          for (const auto& tri : table[cs]) {
            std::array<std::uint64_t, 3> keys;
            for (int v = 0; v < 3; ++v) {
              const int e = tri[v];
              const Eigen::Vector3i o = corner_offset(kEdges[e][0]);
              keys[v] = edge_key(i + o.x(), j + o.y(), k + o.z(), kEdgeAxis[e]);
            }
            out.triangles.push_back(keys);
          }
        }
  };

  const int cells_z = nz + 1;
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cells_z));
  std::vector<Slab> slabs(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const int k0 = -1 + static_cast<int>(static_cast<long>(cells_z) * w / workers);
      const int k1 = -1 + static_cast<int>(static_cast<long>(cells_z) * (w + 1) / workers);
      pool.emplace_back(run, k0, k1, std::ref(slabs[w]));
    }
  }

  // Serial reduction in slab order: vertex ids follow first use.
  std::unordered_map<std::uint64_t, std::uint32_t> ids;
  auto vertex = [&](std::uint64_t key) {
    auto [it, fresh] = ids.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
    if (fresh) {
      const int axis = static_cast<int>(key % 3);
      std::uint64_t rest = key / 3;
      const int i = static_cast<int>(rest % px) - 1;
      rest /= px;
      const int j = static_cast<int>(rest % py) - 1;
      const int k = static_cast<int>(rest / py) - 1;
      Eigen::Vector3d p = grid.center(i, j, k);
      p[axis] += 0.5 * grid.edge[axis];
      mesh.vertices.push_back(p);
    }
    return it->second;
  };
  for (const auto& slab : slabs)
    for (const auto& keys : slab.triangles) {
      const std::array<std::uint32_t, 3> t{vertex(keys[0]), vertex(keys[1]), vertex(keys[2])};
      const Eigen::Vector3d& a = mesh.vertices[t[0]];
      if ((mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).norm() <= 2e-12) continue;
      mesh.triangles.push_back(t);
    }

  mesh.normals.assign(mesh.vertices.size(), Eigen::Vector3d::Zero());
  for (const auto& t : mesh.triangles) {
    const Eigen::Vector3d& a = mesh.vertices[t[0]];
    const Eigen::Vector3d n = (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a);
    for (auto v : t) mesh.normals[v] += n;
  }
  for (auto& n : mesh.normals)
    if (n.norm() > 0.0) n.normalize();
  return mesh;
}

double mesh_volume(const SurfaceMesh& mesh) {
  double v = 0.0;
  for (const auto& t : mesh.triangles)
    v += mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]]));
  return v / 6.0;
}

long euler_characteristic(const SurfaceMesh& mesh) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      const auto a = t[e], b = t[(e + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  return static_cast<long>(mesh.vertices.size()) - static_cast<long>(edges.size()) +
         static_cast<long>(mesh.triangles.size());
}

}  // namespace syncap::hull
