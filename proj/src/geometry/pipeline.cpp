#include "syncap/geometry/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "syncap/common/error.hpp"

namespace syncap::geometry {

namespace {

std::size_t joint_count_of(std::span<const Skeleton2D> observations) {
  std::size_t n = 0;
  for (const auto& o : observations) n = std::max(n, o.joints.size());
  return n;
}

std::vector<BaCamera> as_ba_cameras(std::span<const Camera> cameras) {
  std::vector<BaCamera> out;
  out.reserve(cameras.size());
  for (std::size_t c = 0; c < cameras.size(); ++c) out.push_back({cameras[c], c == 0});
  return out;
}

void absorb(FrameReconstruction& out, const BaResult& ba) {
  out.skeleton = ba.skeleton;
  out.initial_cost = ba.initial_cost;
  out.final_cost = ba.final_cost;
  out.residual_count = ba.residual_count;
  out.total_iterations += ba.iterations;
  ++out.optimizer_invocations;
  out.cameras.clear();
  for (const auto& c : ba.cameras) out.cameras.push_back(c.camera);
}

FrameReconstruction unresolved_frame(std::size_t joint_count, std::size_t frame, std::span<const Camera> cameras) {
  FrameReconstruction out;
  out.unresolved = true;
  out.skeleton.frame = frame;
  out.skeleton.joints.assign(joint_count, std::nullopt);
  out.cameras.assign(cameras.begin(), cameras.end());
  return out;
}

bool observes(const Skeleton2D& obs, std::size_t joint) { return joint < obs.joints.size() && obs.joints[joint]; }

FrameReconstruction reconstruct_global(std::span<const Skeleton2D> observations, std::span<const Camera> cameras,
                                       std::vector<CameraPair> pairs, const ReconstructionOptions& options) {
  FrameReconstruction out;
  out.pairs = std::move(pairs);
  out.cloud = triangulate_cloud(observations, cameras, out.pairs);
  const auto init = centroid_init(out.cloud);
  const bool any = std::any_of(init.begin(), init.end(), [](const JointInit& j) { return !j.excluded; });
  if (!any) {
    auto flagged = unresolved_frame(init.size(), observations.front().frame, cameras);
    flagged.pairs = std::move(out.pairs);
    flagged.cloud = std::move(out.cloud);
    return flagged;
  }
  const auto ba_cameras = as_ba_cameras(cameras);
  absorb(out, bundle_adjust(init, observations, ba_cameras, options.mode, options.ba));
  return out;
}

// Seeds from the first valid pair that shares a joint, then adds the other
// observing cameras one at a time and re-optimizes after each addition.
FrameReconstruction reconstruct_incremental(std::span<const Skeleton2D> observations, std::span<const Camera> cameras,
                                            std::vector<CameraPair> pairs, const ReconstructionOptions& options) {
  const std::size_t joints = joint_count_of(observations);
  const std::size_t frame = observations.front().frame;

  auto shares_joint = [&](const CameraPair& p) {
    for (std::size_t m = 0; m < joints; ++m)
      if (observes(observations[p.first], m) && observes(observations[p.second], m)) return true;
    return false;
  };
  auto seed = std::find_if(pairs.begin(), pairs.end(), shares_joint);
  if (seed == pairs.end()) {
    auto flagged = unresolved_frame(joints, frame, cameras);
    flagged.pairs = std::move(pairs);
    return flagged;
  }

  std::vector<bool> active(cameras.size(), false);
  std::vector<JointInit> init(joints);
  std::vector<Camera> current(cameras.begin(), cameras.end());
  auto ba_cameras = as_ba_cameras(cameras);

  auto initialize_joints = [&]() {
    for (std::size_t m = 0; m < joints; ++m) {
      if (!init[m].excluded) continue;
      for (const auto& p : pairs) {
        if (!active[p.first] || !active[p.second]) continue;
        if (!observes(observations[p.first], m) || !observes(observations[p.second], m)) continue;
        try {
          init[m] = {triangulate_pair(observations[p.first].joints[m]->position,
                                      observations[p.second].joints[m]->position, current[p.first], current[p.second]),
                     false};
          break;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::TriangulationDegenerate) throw;
        }
      }
    }
  };

  FrameReconstruction out;
  auto optimize = [&]() {
    std::vector<Skeleton2D> masked(observations.begin(), observations.end());
    for (std::size_t c = 0; c < masked.size(); ++c)
      if (!active[c]) masked[c] = Skeleton2D::missing(masked[c].joints.size(), masked[c].frame, c);
    for (std::size_t c = 0; c < ba_cameras.size(); ++c) ba_cameras[c].camera = current[c];
    const auto ba = bundle_adjust(init, masked, ba_cameras, options.mode, options.ba);
    absorb(out, ba);
    for (std::size_t m = 0; m < joints; ++m)
      if (ba.skeleton.joints[m]) init[m] = {*ba.skeleton.joints[m], false};
    current = out.cameras;
  };

  active[seed->first] = active[seed->second] = true;
  initialize_joints();
  optimize();
  double first_initial_cost = out.initial_cost;

  for (std::size_t c = 0; c < cameras.size(); ++c) {
    if (active[c] || !observations[c].any_present()) continue;
    active[c] = true;
    initialize_joints();
    optimize();
  }

  out.pairs = std::move(pairs);
  out.initial_cost = first_initial_cost;
  return out;
}

}  // namespace

double FrameReconstruction::final_rms() const {
  return residual_count == 0 ? 0.0 : std::sqrt(final_cost / static_cast<double>(residual_count));
}

FrameReconstruction reconstruct_frame(std::span<const Skeleton2D> observations, std::span<const Camera> cameras,
                                      const ReconstructionOptions& options, InitStrategy strategy) {
  if (observations.size() != cameras.size())
    fail(ErrorCode::InvalidArgument, "observation and camera counts differ");
  if (observations.empty()) fail(ErrorCode::InsufficientCameras, "no cameras");

  std::vector<Skeleton2D> filtered;
  filtered.reserve(observations.size());
  for (const auto& o : observations) filtered.push_back(apply_confidence_threshold(o, options.min_confidence));

  if (cameras.size() < 2) return unresolved_frame(joint_count_of(filtered), filtered.front().frame, cameras);
  auto pairs = valid_pairs(cameras, options.pair_range);

  return strategy == InitStrategy::GlobalCentroid ? reconstruct_global(filtered, cameras, std::move(pairs), options)
                                                  : reconstruct_incremental(filtered, cameras, std::move(pairs), options);
}

}  // namespace syncap::geometry
