#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "syncap/dataplane/merge.hpp"
#include "syncap/geometry/pipeline.hpp"
#include "syncap/harness/config.hpp"
#include "syncap/harness/csv.hpp"
#include "syncap/harness/report.hpp"
#include "syncap/harness/session.hpp"

namespace syncap::harness {

/// One merged trigger as reconstruction input: the decoded joints and the
/// recorded camera of every device that delivered a JOINTS2D record.
struct FrameInput {
  std::uint32_t trigger_id = 0;
  std::vector<std::uint16_t> devices;
  std::vector<geometry::Skeleton2D> observations;
  std::vector<geometry::Camera> cameras;
};

FrameInput frame_input(const dataplane::MergedCapture& merged, std::size_t joint_count);

geometry::ReconstructionOptions reconstruction_options(const Config& config);

/// True when the config adds no noise anywhere, so reconstruction must be exact.
bool is_noiseless(const Config& config);

struct FrameOutcome {
  std::uint32_t trigger_id = 0;
  std::size_t cameras = 0;
  bool unresolved = false;
  double global_rms = 0.0;
  double incremental_rms = 0.0;
  int global_invocations = 0;
  int incremental_invocations = 0;
  int global_iterations = 0;
  int incremental_iterations = 0;
  double reprojection_mean = 0.0;  // NaN when nothing could be evaluated
  double joint_error_mean = 0.0;   // against the ground truth at the host's capture instant
  double joint_error_max = 0.0;
  double global_wall_ms = 0.0;
  double incremental_wall_ms = 0.0;
};

struct ReconstructionRun {
  std::vector<FrameOutcome> frames;
  std::vector<geometry::Skeleton3D> skeletons;  // global centroid-initialized results
  CsvTable table;
  CsvTable summary;
  Report report;

  double mean_reprojection_error() const;
  double max_joint_error() const;
  long total_invocations(bool incremental) const;
};

/// Reconstructs every merged trigger of a session both ways (one global
/// bundle adjustment from per-joint centroids, and incremental camera
/// addition) and reports errors, optimizer work and wall time.
ReconstructionRun reconstruct_session(const Config& config, const SessionResult& session, std::uint64_t seed);

/// Runs the session for `config` and `seed` (joint payloads required), then
/// reconstructs it. With `out`, writes reconstruction.csv,
/// reconstruction_summary.csv, skeletons.jsonl and timing.jsonl; wall times
/// only go to timing.jsonl so the CSVs stay reproducible.
ReconstructionRun run_reconstruction(const Config& config, std::uint64_t seed,
                                     const std::optional<std::filesystem::path>& out = std::nullopt);

}  // namespace syncap::harness
