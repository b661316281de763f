#include "syncap/geometry/bundle_adjustment.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "syncap/common/error.hpp"

namespace syncap::geometry {

namespace {

struct Residual {
  std::size_t slot;    // index into the active point list
  std::size_t camera;  // index into the camera list
  Eigen::Vector2d observed;
};

struct Problem {
  std::vector<std::size_t> active_joints;  // joint index per slot
  std::vector<Residual> residuals;
  std::vector<int> camera_offset;  // parameter offset per camera, -1 when not optimized
  int point_params = 0;
  int total_params = 0;
};

struct State {
  std::vector<Eigen::Vector3d> points;
  std::vector<Camera> cameras;
};

double evaluate_cost(const Problem& problem, const State& state) {
  double cost = 0.0;
  for (const auto& r : problem.residuals) {
    auto pixel = try_project(state.points[r.slot], state.cameras[r.camera]);
    if (!pixel) return std::numeric_limits<double>::infinity();
    cost += (*pixel - r.observed).squaredNorm();
  }
  return std::isfinite(cost) ? cost : std::numeric_limits<double>::infinity();
}

// Fills the normal equations H = J^T J and g = J^T r at `state`.
void linearize(const Problem& problem, const State& state, Eigen::MatrixXd& hessian, Eigen::VectorXd& gradient) {
  hessian.setZero(problem.total_params, problem.total_params);
  gradient.setZero(problem.total_params);

  for (const auto& r : problem.residuals) {
    const Camera& cam = state.cameras[r.camera];
    const Eigen::Matrix3d world_to_cam = cam.pose.rotation.transpose();
    const Eigen::Vector3d local = world_to_cam * (state.points[r.slot] - cam.pose.translation);
    const double inv_z = 1.0 / local.z();
    const auto& k = cam.intrinsics;

    Eigen::Matrix<double, 2, 3> d_proj;
    d_proj << k.fx * inv_z, 0.0, -k.fx * local.x() * inv_z * inv_z, 0.0, k.fy * inv_z,
        -k.fy * local.y() * inv_z * inv_z;
    const Eigen::Vector2d residual(k.fx * local.x() * inv_z + k.cx - r.observed.x(),
                                   k.fy * local.y() * inv_z + k.cy - r.observed.y());

    // Each residual touches one point block and at most one camera block;
    // accumulate only those.
    const int point_col = static_cast<int>(3 * r.slot);
    const Eigen::Matrix<double, 2, 3> j_point = d_proj * world_to_cam;
    hessian.block<3, 3>(point_col, point_col).noalias() += j_point.transpose() * j_point;
    gradient.segment<3>(point_col).noalias() += j_point.transpose() * residual;

    const int cam_col = problem.camera_offset[r.camera];
    if (cam_col >= 0) {
      Eigen::Matrix<double, 2, 6> j_cam;
      j_cam.leftCols<3>() = d_proj * skew(local);
      j_cam.rightCols<3>() = -j_point;
      const Eigen::Matrix<double, 3, 6> cross = j_point.transpose() * j_cam;
      hessian.block<3, 6>(point_col, cam_col) += cross;
      hessian.block<6, 3>(cam_col, point_col) += cross.transpose();
      hessian.block<6, 6>(cam_col, cam_col).noalias() += j_cam.transpose() * j_cam;
      gradient.segment<6>(cam_col).noalias() += j_cam.transpose() * residual;
    }
  }
}

State apply_step(const Problem& problem, const State& state, const Eigen::VectorXd& step) {
  State out = state;
  for (std::size_t s = 0; s < out.points.size(); ++s) out.points[s] += step.segment<3>(static_cast<int>(3 * s));
  for (std::size_t c = 0; c < out.cameras.size(); ++c) {
    const int offset = problem.camera_offset[c];
    if (offset < 0) continue;
    const Eigen::Vector3d rotation_step = step.segment<3>(offset);
    auto& pose = out.cameras[c].pose;
    pose.rotation = pose.rotation * axis_angle(rotation_step, rotation_step.norm());
    pose.translation += step.segment<3>(offset + 3);
  }
  return out;
}

}  // namespace

double BaResult::final_rms() const {
  return residual_count == 0 ? 0.0 : std::sqrt(final_cost / static_cast<double>(residual_count));
}

BaResult bundle_adjust(std::span<const JointInit> init, std::span<const Skeleton2D> observations,
                       std::span<const BaCamera> cameras, BaMode mode, const BaOptions& options) {
  if (observations.size() != cameras.size())
    fail(ErrorCode::InvalidArgument, "observation and camera counts differ");

  Problem problem;
  State state;
  for (const auto& c : cameras) state.cameras.push_back(c.camera);

  std::vector<std::optional<Eigen::Vector3d>> passthrough(init.size());
  for (std::size_t m = 0; m < init.size(); ++m) {
    if (init[m].excluded) continue;
    std::vector<Residual> joint_residuals;
    for (std::size_t c = 0; c < observations.size(); ++c) {
      const auto& joints = observations[c].joints;
      if (m < joints.size() && joints[m]) joint_residuals.push_back({problem.active_joints.size(), c, joints[m]->position});
    }
    if (joint_residuals.size() < 2) {
      passthrough[m] = init[m].point;
      continue;
    }
    problem.active_joints.push_back(m);
    state.points.push_back(init[m].point);
    problem.residuals.insert(problem.residuals.end(), joint_residuals.begin(), joint_residuals.end());
  }
  if (problem.active_joints.empty()) fail(ErrorCode::NoObservations, "no joint is observed by two or more cameras");

  problem.point_params = static_cast<int>(3 * problem.active_joints.size());
  problem.total_params = problem.point_params;
  problem.camera_offset.assign(cameras.size(), -1);
  if (mode == BaMode::PointsAndCameras) {
    for (std::size_t c = 0; c < cameras.size(); ++c) {
      if (cameras[c].fixed) continue;
      problem.camera_offset[c] = problem.total_params;
      problem.total_params += 6;
    }
  }

  BaResult result;
  result.residual_count = problem.residuals.size();
  double cost = evaluate_cost(problem, state);
  if (!std::isfinite(cost)) fail(ErrorCode::NonFiniteResidual, "initial residuals are not finite");
  result.initial_cost = cost;
  result.cost_history.push_back(cost);

  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  linearize(problem, state, hessian, gradient);
  double damping = options.initial_damping;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (cost == 0.0 || gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) break;
    ++result.iterations;

    Eigen::MatrixXd augmented = hessian;
    for (int i = 0; i < problem.total_params; ++i) {
      const double d = hessian(i, i);
      augmented(i, i) += damping * (d > 0.0 ? d : 1.0);
    }
    Eigen::VectorXd step(problem.total_params);
    if (problem.total_params == problem.point_params) {
      // points only: the system is block diagonal, one 3x3 block per joint
      for (int b = 0; b < problem.total_params; b += 3)
        step.segment<3>(b) = augmented.block<3, 3>(b, b).ldlt().solve(-gradient.segment<3>(b));
    } else {
      step = augmented.ldlt().solve(-gradient);
    }
    if (!step.allFinite()) {
      damping *= options.damping_increase;
      continue;
    }

    State candidate = apply_step(problem, state, step);
    const double candidate_cost = evaluate_cost(problem, candidate);
    if (candidate_cost < cost) {
      const double relative_change = (cost - candidate_cost) / cost;
      state = std::move(candidate);
      cost = candidate_cost;
      result.cost_history.push_back(cost);
      damping /= options.damping_decrease;
      if (relative_change < options.relative_cost_tolerance) break;
      linearize(problem, state, hessian, gradient);
    } else {
      damping *= options.damping_increase;
      if (damping > 1e32) break;
    }
  }

  result.final_cost = cost;
  result.skeleton.joints = std::move(passthrough);
  for (std::size_t s = 0; s < problem.active_joints.size(); ++s)
    result.skeleton.joints[problem.active_joints[s]] = state.points[s];
  if (!observations.empty()) result.skeleton.frame = observations.front().frame;

  result.cameras.assign(cameras.begin(), cameras.end());
  if (mode == BaMode::PointsAndCameras) {
    for (std::size_t c = 0; c < cameras.size(); ++c)
      if (!cameras[c].fixed) result.cameras[c].camera = state.cameras[c];
  }
  return result;
}

}  // namespace syncap::geometry
