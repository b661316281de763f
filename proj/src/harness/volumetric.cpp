#include "syncap/harness/volumetric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ranges>

#include "syncap/common/error.hpp"
#include "syncap/dataplane/payload_codecs.hpp"
#include "syncap/harness/reconstruction.hpp"
#include "syncap/harness/session.hpp"
#include "syncap/hull/mesh_io.hpp"

namespace syncap::harness {

std::vector<hull::Silhouette> silhouettes_of(const dataplane::MergedCapture& merged) {
  std::vector<hull::Silhouette> out;
  for (const auto& rec : std::views::values(merged.records))
    if (rec.kind == dataplane::PayloadKind::Silhouette)
      out.push_back({dataplane::decode_silhouette(rec.payload), {rec.intrinsics, rec.pose}});
  return out;
}

InteriorCheck check_interior(const hull::VoxelGrid& grid, const std::vector<sim::Capsule>& capsules) {
  std::vector<std::uint8_t> seen(grid.size(), 0);
  InteriorCheck check;
  for (const auto& cap : capsules) {
    const Eigen::Vector3d lo = cap.a.cwiseMin(cap.b).array() - cap.radius;
    const Eigen::Vector3d hi = cap.a.cwiseMax(cap.b).array() + cap.radius;
    std::array<int, 3> from{}, to{};
    for (int ax = 0; ax < 3; ++ax) {
      from[ax] = std::max(0, static_cast<int>(std::floor((lo[ax] - grid.origin[ax]) / grid.edge[ax] - 0.5)));
      to[ax] = std::min(grid.dims[ax] - 1, static_cast<int>(std::ceil((hi[ax] - grid.origin[ax]) / grid.edge[ax] - 0.5)));
    }
    for (int k = from[2]; k <= to[2]; ++k)
      for (int j = from[1]; j <= to[1]; ++j)
        for (int i = from[0]; i <= to[0]; ++i) {
          const std::size_t idx = grid.index(i, j, k);
          if (seen[idx]) continue;
          if (sim::segment_distance(grid.center(i, j, k), cap.a, cap.b) >= cap.radius) continue;
          seen[idx] = 1;
          ++check.interior;
          if (!grid.occupancy[idx]) ++check.violations;
        }
  }
  return check;
}

namespace {

// Twice the signed area of abc in the y-z plane.
double orient(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  return (b.y() - a.y()) * (c.z() - a.z()) - (c.y() - a.y()) * (b.z() - a.z());
}

bool before(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return a.y() != b.y() ? a.y() < b.y() : a.z() < b.z();
}

// Side of p relative to edge ab, evaluated in a fixed endpoint order so that
// ab and ba give exactly opposite values.
double edge_side(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& p) {
  return before(a, b) ? orient(a, b, p) : -orient(b, a, p);
}

bool owns_edge(const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return before(a, b); }

}  // namespace

double fraction_inside(const hull::SurfaceMesh& mesh, const hull::VoxelGrid& grid,
                       std::span<const Eigen::Vector3d> points) {
  if (points.empty()) return 0.0;
  // buckets cover the grid plus one cell of padding on each side
  const int ny = grid.dims[1] + 2, nz = grid.dims[2] + 2;
  const double y0 = grid.origin.y() - grid.edge.y(), z0 = grid.origin.z() - grid.edge.z();
  auto cell = [&](double v, double origin, double edge, int n) {
    return std::clamp(static_cast<int>(std::floor((v - origin) / edge)), 0, n - 1);
  };
  std::vector<std::vector<std::uint32_t>> buckets(static_cast<std::size_t>(ny) * nz);
  for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    double ylo = 1e300, yhi = -1e300, zlo = 1e300, zhi = -1e300;
    for (auto v : tri) {
      ylo = std::min(ylo, mesh.vertices[v].y());
      yhi = std::max(yhi, mesh.vertices[v].y());
      zlo = std::min(zlo, mesh.vertices[v].z());
      zhi = std::max(zhi, mesh.vertices[v].z());
    }
    for (int b = cell(zlo, z0, grid.edge.z(), nz); b <= cell(zhi, z0, grid.edge.z(), nz); ++b)
      for (int a = cell(ylo, y0, grid.edge.y(), ny); a <= cell(yhi, y0, grid.edge.y(), ny); ++a)
        buckets[static_cast<std::size_t>(b) * ny + a].push_back(t);
  }

  std::size_t inside = 0;
  for (const auto& p : points) {
    const auto& bucket =
        buckets[static_cast<std::size_t>(cell(p.z(), z0, grid.edge.z(), nz)) * ny + cell(p.y(), y0, grid.edge.y(), ny)];
    int crossings = 0;
    for (auto t : bucket) {
      const auto& tri = mesh.triangles[t];
      const Eigen::Vector3d* v[3] = {&mesh.vertices[tri[0]], &mesh.vertices[tri[1]], &mesh.vertices[tri[2]]};
      const double det = orient(*v[0], *v[1], *v[2]);
      if (det == 0.0) continue;
      if (det < 0.0) std::swap(v[1], v[2]);
      // every edge must hold p on its left, or on it when the edge owns it;
      // neighbours share an edge in opposite directions, so exactly one owns it
      bool hit = true;
      double w[3];
      for (int e = 0; e < 3 && hit; ++e) {
        const Eigen::Vector3d& a = *v[e];
        const Eigen::Vector3d& b = *v[(e + 1) % 3];
        w[e] = edge_side(a, b, p);
        hit = w[e] > 0.0 || (w[e] == 0.0 && owns_edge(a, b));
      }
      if (!hit) continue;
      const double sum = w[0] + w[1] + w[2];
      if (sum <= 0.0) continue;
      // w[e] is the weight of the vertex opposite edge e
      const double x = (w[1] * v[0]->x() + w[2] * v[1]->x() + w[0] * v[2]->x()) / sum;
      if (x > p.x()) ++crossings;
    }
    inside += crossings % 2;
  }
  return static_cast<double>(inside) / static_cast<double>(points.size());
}

namespace {

Eigen::Vector3d hip_of(const geometry::Skeleton3D& s, const Eigen::Vector3d& fallback) {
  if (s.joints.size() > geometry::kMidHipJoint && s.joints[geometry::kMidHipJoint])
    return *s.joints[geometry::kMidHipJoint];
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  int n = 0;
  for (const auto& j : s.joints)
    if (j) {
      sum += *j;
      ++n;
    }
  return n == 0 ? fallback : Eigen::Vector3d(sum / n);
}

const dataplane::MergedCapture* find_trigger(const SessionResult& s, std::uint32_t id) {
  for (const auto& m : s.merged)
    if (m.trigger_id == id) return &m;
  return nullptr;
}

}  // namespace

VolumetricRun run_volumetric(const Config& c, std::uint64_t seed, const std::optional<std::filesystem::path>& out) {
  validate(c);
  if (out) claim_output_dir(*out, c, "volumetric");
  const auto& v = c.volumetric;
  std::vector<int> thresholds = v.thresholds;
  if (thresholds.empty())
    for (int n = std::max(1, c.devices - 2); n <= c.devices; ++n) thresholds.push_back(n);
  std::sort(thresholds.begin(), thresholds.end());
  for (int n : thresholds)
    if (n < 1 || n > c.devices) fail(ErrorCode::ConfigError, "volumetric threshold outside [1, devices]");
  const int mesh_threshold = v.mesh_threshold > 0 ? v.mesh_threshold : c.devices;

  Config joints_cfg = c;
  joints_cfg.data.payload = "joints";
  Config sil_cfg = c;
  sil_cfg.data.payload = "silhouette";
  Config noisy_cfg = sil_cfg;
  noisy_cfg.noise.rotation_sigma_deg = v.pose_noise_deg;
  noisy_cfg.noise.translation_sigma_m = 0.0;
  noisy_cfg.noise.reversion = 1.0;  // independent per frame
  const auto joints = run_session(joints_cfg, seed);
  const auto sils = run_session(sil_cfg, seed);
  const auto noisy = run_session(noisy_cfg, seed);

  const auto options = reconstruction_options(c);
  const std::size_t available = sils.merged.size();
  const std::size_t wanted = std::min<std::size_t>(available, static_cast<std::size_t>(std::max(1, v.frames)));
  const std::array<int, 3> dims{v.dims, v.dims, v.dims};
  const bool exact_poses = c.noise.rotation_sigma_deg == 0.0 && c.noise.translation_sigma_m == 0.0 &&
                           c.network.jitter_ms == 0.0 && c.clock.drift_ppm == 0.0;

  const std::string hash = config_hash(c);
  VolumetricRun run{{},
                    CsvTable({"trigger_id", "threshold", "volume_m3", "noisy_volume_m3", "inflation"}, seed, hash),
                    CsvTable({"trigger_id", "silhouettes", "hip_x", "hip_y", "hip_z", "mesh_threshold", "triangles",
                              "mesh_volume_m3", "voxel_volume_m3", "interior_voxels", "interior_violations",
                              "samples_inside"},
                             seed, hash),
                    {}};
  if (out) std::filesystem::create_directories(*out / "meshes");

  for (std::size_t k = 0; k < wanted; ++k) {
    const auto& merged = sils.merged[k * available / wanted];
    VolumeFrame f;
    f.trigger_id = merged.trigger_id;
    f.thresholds = thresholds;

    Eigen::Vector3d fallback = sils.scene.rig.target;
    if (const auto* jm = find_trigger(joints, f.trigger_id)) {
      const auto in = frame_input(*jm, joints.scene.actor.joint_count());
      if (!in.cameras.empty()) f.hip = hip_of(geometry::reconstruct_frame(in.observations, in.cameras, options).skeleton, fallback);
      else f.hip = fallback;
    } else {
      f.hip = fallback;
    }

    const auto silhouettes = silhouettes_of(merged);
    f.silhouettes = silhouettes.size();
    if (silhouettes.empty()) continue;
    auto grid = hull::build_grid(f.hip, hull::kDefaultExtent, dims);
    auto usable = [&](int n) { return std::clamp(n, 1, static_cast<int>(silhouettes.size())); };
    hull::carve(grid, silhouettes, usable(thresholds.front()));
    for (int n : thresholds) {
      hull::apply_threshold(grid, usable(n));
      f.volumes.push_back(grid.occupied_volume());
    }
    if (const auto it = sils.truth.find(f.trigger_id); it != sils.truth.end()) {
      const auto caps = sim::actor_capsules(it->second.skeleton, sils.scene.actor);
      hull::apply_threshold(grid, usable(thresholds.back()));
      f.interior = check_interior(grid, caps);
      hull::apply_threshold(grid, usable(mesh_threshold));
      const auto mesh = hull::marching_cubes(grid);
      f.triangles = mesh.triangles.size();
      f.mesh_volume = hull::mesh_volume(mesh);
      f.mesh_voxel_volume = grid.occupied_volume();
      const auto samples = sim::capsule_samples(caps);
      f.samples_inside = fraction_inside(mesh, grid, samples);
      if (out) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06u", f.trigger_id);
        hull::export_mesh(mesh, *out / "meshes" / (std::string(name) + ".ply"), hull::MeshFormat::Ply);
        hull::export_mesh(mesh, *out / "meshes" / (std::string(name) + ".obj"), hull::MeshFormat::Obj);
      }
    }

    if (const auto* nm = find_trigger(noisy, f.trigger_id)) {
      const auto noisy_sils = silhouettes_of(*nm);
      auto noisy_grid = hull::build_grid(f.hip, hull::kDefaultExtent, dims);
      auto noisy_usable = [&](int n) { return std::clamp(n, 1, static_cast<int>(noisy_sils.size())); };
      if (!noisy_sils.empty()) {
        hull::carve(noisy_grid, noisy_sils, noisy_usable(thresholds.front()));
        for (int n : thresholds) {
          hull::apply_threshold(noisy_grid, noisy_usable(n));
          f.noisy_volumes.push_back(noisy_grid.occupied_volume());
        }
      }
    }

    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      const double noisy_v = t < f.noisy_volumes.size() ? f.noisy_volumes[t] : std::nan("");
      run.volumes.add({std::int64_t(f.trigger_id), std::int64_t(thresholds[t]), f.volumes[t], noisy_v,
                       f.volumes[t] > 0.0 ? noisy_v / f.volumes[t] : std::nan("")});
    }
    run.meshes.add({std::int64_t(f.trigger_id), std::int64_t(f.silhouettes), f.hip.x(), f.hip.y(), f.hip.z(),
                    std::int64_t(mesh_threshold), std::int64_t(f.triangles), f.mesh_volume, f.mesh_voxel_volume,
                    std::int64_t(f.interior.interior), std::int64_t(f.interior.violations), f.samples_inside});
    run.frames.push_back(std::move(f));
  }
  if (out) {
    run.volumes.write(*out / "volumes.csv");
    run.meshes.write(*out / "meshes.csv");
  }

  auto& r = run.report;
  r.experiment = "volumetric";
  r.check("frames were carved", !run.frames.empty(), std::to_string(run.frames.size()) + " frames");
  bool monotone = true;
  for (const auto& f : run.frames)
    for (std::size_t t = 1; t < f.volumes.size(); ++t) monotone = monotone && f.volumes[t] <= f.volumes[t - 1];
  r.check("volume non-increasing in the support threshold", monotone);

  const auto mesh_index = std::find(thresholds.begin(), thresholds.end(), mesh_threshold) - thresholds.begin();
  if (static_cast<std::size_t>(mesh_index) < thresholds.size()) {
    double worst = 0.0;
    for (const auto& f : run.frames)
      if (static_cast<std::size_t>(mesh_index) < f.noisy_volumes.size() && f.volumes[mesh_index] > 0.0)
        worst = std::max(worst, f.noisy_volumes[mesh_index] / f.volumes[mesh_index]);
    r.check("pose noise of " + format_cell(v.pose_noise_deg) + " deg inflates volume at most 50%", worst <= 1.5,
            "worst ratio " + format_cell(worst) + " at threshold " + std::to_string(mesh_threshold));
  }
  if (exact_poses) {
    std::size_t violations = 0, interior = 0;
    for (const auto& f : run.frames) {
      violations += f.interior.violations;
      interior += f.interior.interior;
    }
    r.check("hull holds every voxel center inside the actor", violations == 0 && interior > 0,
            std::to_string(violations) + " of " + std::to_string(interior) + " missing");
  }
  for (const auto& f : run.frames)
    if (f.mesh_voxel_volume > 0.0 && std::abs(f.mesh_volume - f.mesh_voxel_volume) > 0.1 * f.mesh_voxel_volume) {
      r.check("mesh volume within 10% of voxel volume", false, "trigger " + std::to_string(f.trigger_id));
      break;
    }
  return run;
}

}  // namespace syncap::harness
