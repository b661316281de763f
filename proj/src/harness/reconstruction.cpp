#include "syncap/harness/reconstruction.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "syncap/common/error.hpp"
#include "syncap/dataplane/payload_codecs.hpp"
#include "syncap/geometry/reprojection.hpp"

namespace syncap::harness {

FrameInput frame_input(const dataplane::MergedCapture& merged, std::size_t joint_count) {
  FrameInput in;
  in.trigger_id = merged.trigger_id;
  for (const auto& [device, rec] : merged.records) {
    if (rec.kind != dataplane::PayloadKind::Joints2D) continue;
    auto obs = dataplane::decode_joints(rec.payload, joint_count);
    obs.frame = merged.trigger_id;
    obs.camera = in.cameras.size();
    in.devices.push_back(device);
    in.observations.push_back(std::move(obs));
    in.cameras.push_back({rec.intrinsics, rec.pose});
  }
  return in;
}

geometry::ReconstructionOptions reconstruction_options(const Config& c) {
  geometry::ReconstructionOptions o;
  o.pair_range = {c.reconstruction.pair_min_deg, c.reconstruction.pair_max_deg};
  o.min_confidence = c.reconstruction.min_confidence;
  o.mode = c.reconstruction.mode == "points_and_cameras" ? geometry::BaMode::PointsAndCameras
                                                         : geometry::BaMode::PointsOnly;
  return o;
}

bool is_noiseless(const Config& c) {
  return c.noise.pixel_sigma == 0.0 && c.noise.miss_rate == 0.0 && c.noise.rotation_sigma_deg == 0.0 &&
         c.noise.translation_sigma_m == 0.0 && c.network.jitter_ms == 0.0 && c.clock.drift_ppm == 0.0;
}

double ReconstructionRun::mean_reprojection_error() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : frames)
    if (!std::isnan(f.reprojection_mean)) {
      sum += f.reprojection_mean;
      ++n;
    }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

double ReconstructionRun::max_joint_error() const {
  double worst = 0.0;
  for (const auto& f : frames) worst = std::max(worst, f.joint_error_max);
  return worst;
}

long ReconstructionRun::total_invocations(bool incremental) const {
  long n = 0;
  for (const auto& f : frames) n += incremental ? f.incremental_invocations : f.global_invocations;
  return n;
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// Relative agreement with an absolute floor, for frames whose RMS is ~0.
bool rms_agrees(double a, double b) { return std::abs(a - b) <= 0.01 * std::max(a, b) + 1e-9; }

}  // namespace

ReconstructionRun reconstruct_session(const Config& c, const SessionResult& session, std::uint64_t seed) {
  const std::string hash = config_hash(c);
  const auto options = reconstruction_options(c);
  const std::size_t joints = session.scene.actor.joint_count();
  ReconstructionRun run{{},
                        {},
                        CsvTable({"trigger_id", "cameras", "unresolved", "global_rms_px", "incremental_rms_px",
                                  "global_invocations", "incremental_invocations", "global_iterations",
                                  "incremental_iterations", "reprojection_mean_px", "joint_error_mean_m",
                                  "joint_error_max_m"},
                                 seed, hash),
                        CsvTable({"mode", "frames", "mean_reprojection_px", "max_joint_error_m",
                                  "global_invocations", "incremental_invocations"},
                                 seed, hash),
                        {}};

  for (const auto& merged : session.merged) {
    const auto in = frame_input(merged, joints);
    FrameOutcome f;
    f.trigger_id = in.trigger_id;
    f.cameras = in.cameras.size();
    if (in.cameras.empty()) {
      f.unresolved = true;
      f.reprojection_mean = std::numeric_limits<double>::quiet_NaN();
      run.frames.push_back(f);
      run.skeletons.push_back({in.trigger_id, std::vector<std::optional<Eigen::Vector3d>>(joints)});
      continue;
    }
    auto t0 = std::chrono::steady_clock::now();
    const auto global = geometry::reconstruct_frame(in.observations, in.cameras, options,
                                                    geometry::InitStrategy::GlobalCentroid);
    f.global_wall_ms = elapsed_ms(t0);
    t0 = std::chrono::steady_clock::now();
    const auto incremental =
        geometry::reconstruct_frame(in.observations, in.cameras, options, geometry::InitStrategy::Incremental);
    f.incremental_wall_ms = elapsed_ms(t0);

    f.unresolved = global.unresolved;
    f.global_rms = global.final_rms();
    f.incremental_rms = incremental.final_rms();
    f.global_invocations = global.optimizer_invocations;
    f.incremental_invocations = incremental.optimizer_invocations;
    f.global_iterations = global.total_iterations;
    f.incremental_iterations = incremental.total_iterations;
    try {
      f.reprojection_mean = geometry::reprojection_error(global.skeleton, in.observations, in.cameras).mean;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyEvaluation) throw;
      f.reprojection_mean = std::numeric_limits<double>::quiet_NaN();
    }
    if (auto it = session.truth.find(in.trigger_id); it != session.truth.end()) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t m = 0; m < joints; ++m) {
        const auto& est = global.skeleton.joints[m];
        const auto& gt = it->second.skeleton.joints[m];
        if (!est || !gt) continue;
        const double e = (*est - *gt).norm();
        sum += e;
        f.joint_error_max = std::max(f.joint_error_max, e);
        ++n;
      }
      f.joint_error_mean = n == 0 ? 0.0 : sum / static_cast<double>(n);
    }
    run.frames.push_back(f);
    run.skeletons.push_back(global.skeleton);
  }

  for (const auto& f : run.frames)
    run.table.add({std::int64_t(f.trigger_id), std::int64_t(f.cameras), std::int64_t(f.unresolved), f.global_rms,
                   f.incremental_rms, std::int64_t(f.global_invocations), std::int64_t(f.incremental_invocations),
                   std::int64_t(f.global_iterations), std::int64_t(f.incremental_iterations), f.reprojection_mean,
                   f.joint_error_mean, f.joint_error_max});
  run.summary.add({c.reconstruction.mode, std::int64_t(run.frames.size()), run.mean_reprojection_error(),
                   run.max_joint_error(), std::int64_t(run.total_invocations(false)),
                   std::int64_t(run.total_invocations(true))});

  auto& r = run.report;
  r.experiment = "reconstruct";
  std::size_t disagree = 0;
  std::uint32_t first_bad = 0;
  for (const auto& f : run.frames)
    if (!f.unresolved && !rms_agrees(f.global_rms, f.incremental_rms) && disagree++ == 0) first_bad = f.trigger_id;
  r.check("global and incremental final RMS within 1% on every frame", disagree == 0,
          disagree == 0 ? std::to_string(run.frames.size()) + " frames"
                        : std::to_string(disagree) + " frames differ, first at trigger " + std::to_string(first_bad));
  r.check("global initialization needs fewer optimizer invocations",
          run.total_invocations(false) < run.total_invocations(true),
          std::to_string(run.total_invocations(false)) + " vs " + std::to_string(run.total_invocations(true)));
  if (is_noiseless(c)) {
    r.check("noiseless mean re-projection error below 1e-6 px", run.mean_reprojection_error() < 1e-6,
            format_cell(run.mean_reprojection_error()) + " px");
    r.check("noiseless joint position error below 1e-6 m", run.max_joint_error() < 1e-6,
            format_cell(run.max_joint_error()) + " m");
  }
  return run;
}

ReconstructionRun run_reconstruction(const Config& c, std::uint64_t seed, const std::optional<std::filesystem::path>& out) {
  validate(c);
  if (c.data.payload != "joints") fail(ErrorCode::ConfigError, "reconstruction needs data.payload = joints");
  if (out) claim_output_dir(*out, c, "reconstruct");
  const auto session = run_session(c, seed);
  auto run = reconstruct_session(c, session, seed);
  if (out) {
    run.table.write(*out / "reconstruction.csv");
    run.summary.write(*out / "reconstruction_summary.csv");
    std::ofstream sk(*out / "skeletons.jsonl", std::ios::trunc);
    for (const auto& s : run.skeletons) {
      nlohmann::json j;
      j["trigger_id"] = s.frame;
      auto& arr = j["joints"] = nlohmann::json::array();
      for (const auto& p : s.joints) arr.push_back(p ? nlohmann::json{p->x(), p->y(), p->z()} : nlohmann::json());
      sk << j.dump() << "\n";
    }
    std::ofstream tm(*out / "timing.jsonl", std::ios::trunc);
    double g = 0.0, i = 0.0;
    for (const auto& f : run.frames) {
      tm << nlohmann::json{{"trigger_id", f.trigger_id}, {"global_ms", f.global_wall_ms},
                           {"incremental_ms", f.incremental_wall_ms}}
                .dump()
         << "\n";
      g += f.global_wall_ms;
      i += f.incremental_wall_ms;
    }
    tm << nlohmann::json{{"total_global_ms", g}, {"total_incremental_ms", i}, {"ratio", g > 0.0 ? i / g : 0.0}}.dump()
       << "\n";
    if (!sk || !tm) fail(ErrorCode::IoFailure, "cannot write reconstruction outputs");
  }
  return run;
}

}  // namespace syncap::harness
