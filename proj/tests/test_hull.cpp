#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "temp_dir.hpp"
#include "syncap/common/error.hpp"
#include "syncap/hull/carve.hpp"
#include "syncap/hull/grid.hpp"
#include "syncap/hull/marching_cubes.hpp"
#include "syncap/hull/mesh_io.hpp"
#include "syncap/sim/observe.hpp"

using namespace syncap;
using namespace syncap::hull;

namespace {

const Eigen::Vector3d kCenter{0.0, 0.0, 1.0};
constexpr double kRadius = 0.5;

double sphere_volume() { return 4.0 / 3.0 * std::numbers::pi * std::pow(kRadius, 3); }

std::vector<Silhouette> sphere_silhouettes(std::size_t cameras = 6) {
  std::vector<Silhouette> out;
  for (const auto& cam : oracle::ring(cameras)) out.push_back({sim::render_silhouette({{kCenter, kCenter, kRadius}}, cam), cam});
  return out;
}

VoxelGrid carved_sphere(int n, int threshold = 6, std::size_t cameras = 6) {
  auto grid = build_grid(kCenter, kDefaultExtent, {n, n, n});
  carve(grid, sphere_silhouettes(cameras), threshold);
  return grid;
}

std::size_t superset_violations(const VoxelGrid& g) {
  std::size_t bad = 0;
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i)
        if ((g.center(i, j, k) - kCenter).norm() <= kRadius && !g.occupied(i, j, k)) ++bad;
  return bad;
}

geometry::Mask full_mask() {
  geometry::Mask m(640, 480);
  std::fill(m.pixels.begin(), m.pixels.end(), 1);
  return m;
}

// Every directed edge is matched by as many reverse uses. Fan chords of two
// neighbouring cells can coincide on their shared face, so an edge may carry
// four triangles; the surface is still closed.
bool closed_and_oriented(const SurfaceMesh& mesh) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) ++directed[{t[e], t[(e + 1) % 3]}];
  for (const auto& [edge, count] : directed) {
    auto back = directed.find({edge.second, edge.first});
    if (back == directed.end() || back->second != count) return false;
  }
  return true;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("default grid edge per axis") {
    const auto g = build_grid({0, 0, 0}, kDefaultExtent, kDefaultDims);
    CHECK(g.edge.x() == doctest::Approx(0.01125));
    CHECK(g.edge.y() == doctest::Approx(0.01125));
    CHECK(g.edge.z() == doctest::Approx(0.011875));
    CHECK(g.size() == 160u * 160u * 160u);
    CHECK((g.center(0, 0, 0) - (Eigen::Vector3d(-0.9, -0.9, -0.95) + 0.5 * g.edge)).norm() < 1e-12);
  }

  TEST_CASE("a single voxel sits on the hip") {
    const Eigen::Vector3d hip(0.3, -1.0, 0.9);
    const auto g = build_grid(hip, {1, 1, 1}, {1, 1, 1});
    CHECK((g.center(0, 0, 0) - hip).norm() < 1e-15);
  }

  TEST_CASE("bad dims") {
    CHECK_THROWS_AS(build_grid({0, 0, 0}, {0, 1, 1}, {2, 2, 2}), Error);
    CHECK_THROWS_AS(build_grid({0, 0, 0}, {1, 1, 1}, {2, 0, 2}), Error);
    try {
      build_grid({0, 0, 0}, {1, -1, 1}, {2, 2, 2});
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadDims);
    }
  }
}

TEST_SUITE("carve") {
  TEST_CASE("full masks keep every voxel in front of the cameras") {
    auto g = build_grid(kCenter, kDefaultExtent, {20, 20, 20});
    std::vector<Silhouette> s;
    for (const auto& cam : oracle::ring(6)) s.push_back({full_mask(), cam});
    carve(g, s, 6);
    // anything off-frame is outside a cone even with a full mask
    std::size_t expect = 0;
    for (int k = 0; k < 20; ++k)
      for (int j = 0; j < 20; ++j)
        for (int i = 0; i < 20; ++i) {
          bool all = true;
          for (const auto& sil : s) {
            const auto px = geometry::try_project(g.center(i, j, k), sil.camera);
            all = all && px && px->x() >= 0 && px->y() >= 0 && px->x() < 640 && px->y() < 480;
          }
          expect += all;
        }
    CHECK(g.occupied_count() == expect);
    CHECK(expect == g.size());
  }

  TEST_CASE("one empty mask empties the hull at n = C") {
    auto s = sphere_silhouettes();
    s[2].mask = geometry::Mask(640, 480);
    auto g = build_grid(kCenter, kDefaultExtent, {32, 32, 32});
    carve(g, s, 6);
    CHECK(g.occupied_count() == 0);
    carve(g, s, 5);
    CHECK(g.occupied_count() > 0);
  }

  TEST_CASE("argument errors") {
    auto g = build_grid(kCenter, kDefaultExtent, {4, 4, 4});
    try {
      carve(g, {}, 1);
      FAIL("expected NoSilhouettes");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoSilhouettes);
    }
    const auto s = sphere_silhouettes(2);
    CHECK_THROWS_AS(carve(g, s, 3), Error);
    CHECK_THROWS_AS(carve(g, s, 0), Error);
    CHECK(default_threshold(6) == 5);
    CHECK(default_threshold(1) == 1);
  }

  TEST_CASE("sphere hull contains the sphere and stays within the cone bound") {
    const auto g = carved_sphere(80);
    CHECK(superset_violations(g) == 0);
    const double ratio = g.occupied_volume() / sphere_volume();
    CHECK(ratio >= 1.0);
    CHECK(ratio <= 1.35);
    const double cones = oracle::sphere_cone_hull_volume(kCenter, kRadius, oracle::ring(6), kCenter, kDefaultExtent, 40);
    CHECK(cones / sphere_volume() >= 1.0);
    CHECK(g.occupied_volume() == doctest::Approx(cones).epsilon(0.10));
  }

  TEST_CASE("occupancy shrinks as the threshold rises") {
    auto g = carved_sphere(40, 4);
    std::vector<std::uint8_t> prev = g.occupancy;
    for (int n = 5; n <= 6; ++n) {
      apply_threshold(g, n);
      for (std::size_t v = 0; v < g.size(); ++v) REQUIRE((g.occupancy[v] <= prev[v]));
      prev = g.occupancy;
    }
    auto direct = carved_sphere(40, 6);
    CHECK(direct.occupancy == g.occupancy);
  }

  TEST_CASE("cameras: a full-mask camera changes nothing, a real one never grows the hull") {
    auto base = carved_sphere(40, 6, 6);
    auto s = sphere_silhouettes(6);
    // a full mask from a viewpoint that sees the whole grid
    const geometry::Camera top{{}, {oracle::look_at({0.01, 0, 9.0}, kCenter), {0.01, 0, 9.0}}};
    s.push_back({full_mask(), top});
    auto g = build_grid(kCenter, kDefaultExtent, {40, 40, 40});
    carve(g, s, 7);
    CHECK(g.occupancy == base.occupancy);

    auto eight = sphere_silhouettes(6);
    const auto extra = oracle::ring_camera(15.0, 4.0, 2.5, kCenter);
    eight.push_back({sim::render_silhouette({{kCenter, kCenter, kRadius}}, extra), extra});
    carve(g, eight, 7);
    for (std::size_t v = 0; v < g.size(); ++v) REQUIRE((g.occupancy[v] <= base.occupancy[v]));
  }

  TEST_CASE("resolution convergence") {
    const double v40 = carved_sphere(40).occupied_volume();
    const double v80 = carved_sphere(80).occupied_volume();
    const double v160 = carved_sphere(160).occupied_volume();
    MESSAGE("volumes " << v40 << " " << v80 << " " << v160);
    CHECK(v80 <= v40);
    CHECK(v160 <= v80);
    CHECK(std::abs(v160 - v80) / v80 <= 0.05);
  }

  TEST_CASE("thread count does not change the result") {
    auto a = build_grid(kCenter, kDefaultExtent, {48, 48, 48});
    auto b = a;
    const auto s = sphere_silhouettes();
    carve(a, s, 5, 1);
    carve(b, s, 5, 7);
    CHECK(a.support == b.support);
    CHECK(a.occupancy == b.occupancy);
  }
}

TEST_SUITE("marching cubes") {
  TEST_CASE("isolated voxel: closed octahedron") {
    auto g = build_grid({0, 0, 0}, {3, 3, 3}, {3, 3, 3});
    g.occupancy[g.index(1, 1, 1)] = 1;
    const auto mesh = marching_cubes(g);
    CHECK(mesh.vertices.size() == 6);
    CHECK(mesh.triangles.size() == 8);
    CHECK(euler_characteristic(mesh) == 2);
    CHECK(closed_and_oriented(mesh));
    CHECK(mesh_volume(mesh) == doctest::Approx(1.0 / 6.0));
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) CHECK(mesh.normals[v].dot(mesh.vertices[v]) > 0.0);
  }

  TEST_CASE("grid-aligned half space gives a flat sheet, two triangles per cell") {
    auto g = build_grid({0, 0, 0}, {8, 8, 8}, {8, 8, 8});
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i) g.occupancy[g.index(i, j, k)] = 1;
    const auto mesh = marching_cubes(g);
    CHECK(closed_and_oriented(mesh));
    CHECK(euler_characteristic(mesh) == 2);
    // the interface sits halfway between layers 3 and 4: z = 0
    std::size_t flat = 0;
    for (const auto& t : mesh.triangles) {
      bool on = true;
      for (auto v : t) on = on && std::abs(mesh.vertices[v].z()) < 1e-12;
      flat += on;
    }
    CHECK(flat == 2u * 7u * 7u);
    CHECK(case_table()[0x0F].size() == 2);
    CHECK(case_table()[0xF0].size() == 2);
  }

  TEST_CASE("random solids give closed, oriented surfaces") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      auto g = build_grid({0, 0, 0}, {10, 10, 10}, {10, 10, 10});
      std::bernoulli_distribution b(0.2 + 0.03 * trial);
      for (auto& o : g.occupancy) o = b(rng);
      const auto mesh = marching_cubes(g);
      REQUIRE(closed_and_oriented(mesh));
      CHECK(mesh_volume(mesh) > 0.0);
    }
  }

  TEST_CASE("every corner case is reachable and tables are closed per cell") {
    // each case as a lone cell in a 2x2x2 grid
    for (int cs = 1; cs < 255; ++cs) {
      auto g = build_grid({0, 0, 0}, {2, 2, 2}, {2, 2, 2});
      for (int c = 0; c < 8; ++c) g.occupancy[g.index(c & 1, (c >> 1) & 1, (c >> 2) & 1)] = (cs >> c) & 1;
      const auto mesh = marching_cubes(g);
      REQUIRE(closed_and_oriented(mesh));
      CHECK(mesh_volume(mesh) > 0.0);
      CHECK_FALSE(case_table()[cs].empty());
    }
    CHECK(case_table()[0].empty());
    CHECK(case_table()[255].empty());
  }

  TEST_CASE("carved sphere: mesh volume tracks voxel volume") {
    const auto g = carved_sphere(80);
    const auto mesh = marching_cubes(g);
    CHECK(closed_and_oriented(mesh));
    CHECK(mesh_volume(mesh) == doctest::Approx(g.occupied_volume()).epsilon(0.10));
    const auto again = marching_cubes(g, 1);
    CHECK(again == mesh);
  }

  TEST_CASE("empty grid is flagged, not thrown") {
    const auto g = build_grid({0, 0, 0}, {1, 1, 1}, {4, 4, 4});
    const auto mesh = marching_cubes(g);
    CHECK(mesh.empty_grid);
    CHECK(mesh.triangles.empty());
  }
}

TEST_SUITE("mesh io") {
  SurfaceMesh triangle() {
    SurfaceMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0.1}};
    m.triangles = {{0, 1, 2}};
    m.normals = {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}};
    return m;
  }

  TEST_CASE("single triangle OBJ") {
    TempDir dir;
    export_mesh(triangle(), dir.path / "t.obj", MeshFormat::Obj);
    std::istringstream in(slurp(dir.path / "t.obj"));
    std::string line;
    int v = 0, f = 0;
    while (std::getline(in, line)) {
      v += line.rfind("v ", 0) == 0;
      if (line.rfind("f ", 0) == 0) {
        ++f;
        CHECK(line == "f 1 2 3");
      }
    }
    CHECK(v == 3);
    CHECK(f == 1);
  }

  TEST_CASE("empty mesh writes a valid file") {
    TempDir dir;
    export_mesh({}, dir.path / "e.ply", MeshFormat::Ply);
    export_mesh({}, dir.path / "e.obj", MeshFormat::Obj);
    const auto back = read_ply(dir.path / "e.ply");
    CHECK(back.vertices.empty());
    CHECK(slurp(dir.path / "e.ply").find("element vertex 0") != std::string::npos);
  }

  TEST_CASE("PLY round trip and byte determinism") {
    TempDir dir;
    auto g = build_grid({0, 0, 0}, {3, 3, 3}, {12, 12, 12});
    for (int i = 3; i < 9; ++i) g.occupancy[g.index(i, 6, 6)] = g.occupancy[g.index(6, i, 6)] = 1;
    const auto mesh = marching_cubes(g);
    export_mesh(mesh, dir.path / "a.ply", MeshFormat::Ply);
    export_mesh(mesh, dir.path / "b.ply", MeshFormat::Ply);
    export_mesh(mesh, dir.path / "a.obj", MeshFormat::Obj);
    export_mesh(mesh, dir.path / "b.obj", MeshFormat::Obj);
    CHECK(slurp(dir.path / "a.ply") == slurp(dir.path / "b.ply"));
    CHECK(slurp(dir.path / "a.obj") == slurp(dir.path / "b.obj"));
    const auto back = read_ply(dir.path / "a.ply");
    CHECK(back.vertices == mesh.vertices);
    CHECK(back.triangles == mesh.triangles);
    CHECK(back.normals == mesh.normals);
  }

  TEST_CASE("unwritable path") {
    try {
      export_mesh(triangle(), "/nonexistent/dir/x.obj", MeshFormat::Obj);
      FAIL("expected IoFailure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IoFailure);
    }
  }
}
