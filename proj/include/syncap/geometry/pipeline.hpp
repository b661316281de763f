#pragma once

#include <span>
#include <vector>

#include "syncap/geometry/bundle_adjustment.hpp"
#include "syncap/geometry/pairs.hpp"
#include "syncap/geometry/triangulation.hpp"

namespace syncap::geometry {

enum class InitStrategy {
  GlobalCentroid,  // one bundle adjustment seeded by per-joint centers of mass
  Incremental,     // seed from one pair, re-run bundle adjustment per added camera
};

struct ReconstructionOptions {
  PairAngleRange pair_range;
  double min_confidence = 0.1;
  BaMode mode = BaMode::PointsOnly;
  BaOptions ba;
};

struct FrameReconstruction {
  Skeleton3D skeleton;
  std::vector<CameraPair> pairs;
  JointCloud cloud;
  std::vector<Camera> cameras;  // refined cameras in PointsAndCameras mode
  int optimizer_invocations = 0;
  int total_iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::size_t residual_count = 0;
  bool unresolved = false;  // no joint could be triangulated; every joint is UNRESOLVED

  double final_rms() const;
};

/// Reconstructs one frame's 3D skeleton. `observations[c]` is camera c's
/// detection (all joints MISSING for a miss-detection). A frame that no
/// valid pair observes is returned flagged `unresolved` rather than thrown.
FrameReconstruction reconstruct_frame(std::span<const Skeleton2D> observations, std::span<const Camera> cameras,
                                      const ReconstructionOptions& options = {},
                                      InitStrategy strategy = InitStrategy::GlobalCentroid);

}  // namespace syncap::geometry
