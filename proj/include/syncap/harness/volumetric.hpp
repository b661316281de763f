#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "syncap/dataplane/merge.hpp"
#include "syncap/harness/config.hpp"
#include "syncap/harness/csv.hpp"
#include "syncap/harness/report.hpp"
#include "syncap/hull/carve.hpp"
#include "syncap/hull/marching_cubes.hpp"
#include "syncap/sim/actor.hpp"

namespace syncap::harness {

/// Decoded silhouettes with the recorded cameras.
std::vector<hull::Silhouette> silhouettes_of(const dataplane::MergedCapture& merged);

struct InteriorCheck {
  std::size_t interior = 0;    // voxel centers strictly inside some capsule
  std::size_t violations = 0;  // of those, unoccupied
};

InteriorCheck check_interior(const hull::VoxelGrid& grid, const std::vector<sim::Capsule>& capsules);

/// Fraction of `points` inside a closed mesh, by the parity of +x ray
/// crossings. Triangles are bucketed on the grid's y-z cells.
double fraction_inside(const hull::SurfaceMesh& mesh, const hull::VoxelGrid& grid,
                       std::span<const Eigen::Vector3d> points);

struct VolumeFrame {
  std::uint32_t trigger_id = 0;
  Eigen::Vector3d hip = Eigen::Vector3d::Zero();
  std::size_t silhouettes = 0;
  std::vector<int> thresholds;
  std::vector<double> volumes;        // per threshold, m^3
  std::vector<double> noisy_volumes;  // same, from the pose-noise session
  InteriorCheck interior;             // at the largest threshold
  double mesh_volume = 0.0;
  double mesh_voxel_volume = 0.0;     // voxel volume at the mesh threshold
  double samples_inside = 0.0;        // capsule samples inside the mesh
  std::size_t triangles = 0;
};

struct VolumetricRun {
  std::vector<VolumeFrame> frames;
  CsvTable volumes;
  CsvTable meshes;
  Report report;
};

/// Runs a joints session (for the hip trajectory) and a silhouette session
/// with the same seed, plus a silhouette session with i.i.d. per-frame pose
/// noise of pose_noise_deg. Carves the chosen triggers around the
/// reconstructed hip, sweeps the support threshold, meshes at
/// mesh_threshold and, with `out`, exports PLY and OBJ per frame.
VolumetricRun run_volumetric(const Config& config, std::uint64_t seed,
                             const std::optional<std::filesystem::path>& out = std::nullopt);

}  // namespace syncap::harness
