#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "syncap/geometry/camera.hpp"
#include "syncap/geometry/skeleton.hpp"
#include "syncap/geometry/triangulation.hpp"

namespace syncap::geometry {

/// Camera parameters seen by the optimizer. A fixed camera is never updated.
struct BaCamera {
  Camera camera;
  bool fixed = true;
};

enum class BaMode { PointsOnly, PointsAndCameras };

struct BaOptions {
  double initial_damping = 1e-3;
  double damping_increase = 10.0;
  double damping_decrease = 10.0;
  double relative_cost_tolerance = 1e-10;
  double gradient_tolerance = 1e-12;
  int max_iterations = 100;
};

struct BaResult {
  Skeleton3D skeleton;
  std::vector<BaCamera> cameras;
  double initial_cost = 0.0;  // sum of squared pixel residuals
  double final_cost = 0.0;
  std::size_t residual_count = 0;  // number of (joint, camera) observations
  int iterations = 0;
  std::vector<double> cost_history;  // initial cost, then one entry per accepted step

  double final_rms() const;
};

/// Minimizes the summed squared re-projection distance of the non-excluded
/// joints by damped Gauss-Newton (Levenberg-Marquardt, Marquardt scaling).
///
/// In PointsAndCameras mode the non-fixed camera poses are refined with
/// axis-angle increments composed onto the current rotation; intrinsics stay
/// fixed. In PointsOnly mode the returned cameras are copies of the input.
///
/// Throws NoObservations when no joint is seen by two or more cameras and
/// NonFiniteResidual when the initial residuals are not finite.
BaResult bundle_adjust(std::span<const JointInit> init, std::span<const Skeleton2D> observations,
                       std::span<const BaCamera> cameras, BaMode mode, const BaOptions& options = {});

}  // namespace syncap::geometry
