#include <algorithm>
#include <cmath>

#include "syncap/sim/observe.hpp"

namespace syncap::sim {

namespace {

// Squared distance between segment p0 + s (p1 - p0), s in [0, 1], and
// segment q0 + t (q1 - q0), t in [0, 1].
double segment_segment_sq(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, const Eigen::Vector3d& q0,
                          const Eigen::Vector3d& q1) {
  const Eigen::Vector3d d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= 1e-18 && e <= 1e-18) return r.squaredNorm();
  if (a <= 1e-18) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-18) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 1e-18 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p0 + s * d1) - (q0 + t * d2)).squaredNorm();
}

}  // namespace

geometry::Mask render_silhouette(const std::vector<Capsule>& capsules, const geometry::Camera& camera) {
  const auto& k = camera.intrinsics;
  const int w = static_cast<int>(k.width), h = static_cast<int>(k.height);
  geometry::Mask mask(w, h);
  // half-diagonal of a pixel per unit depth
  const double footprint = std::hypot(0.5 / k.fx, 0.5 / k.fy);

  for (const auto& cap : capsules) {
    const Eigen::Vector3d a = camera.pose.to_local(cap.a);
    const Eigen::Vector3d b = camera.pose.to_local(cap.b);
    const double far = std::max(a.z(), b.z()) + cap.radius;
    if (far <= 0.0) continue;  // entirely behind the camera
    const double reach = cap.radius + far * footprint;
    const double reach_sq = reach * reach;

    int u0 = 0, u1 = w - 1, v0 = 0, v1 = h - 1;
    const Eigen::Vector3d lo = a.cwiseMin(b).array() - reach;
    const Eigen::Vector3d hi = a.cwiseMax(b).array() + reach;
    if (lo.z() > 1e-6) {
      double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
      for (int i = 0; i < 8; ++i) {
        const Eigen::Vector3d c((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
        const double pu = k.fx * c.x() / c.z() + k.cx, pv = k.fy * c.y() / c.z() + k.cy;
        umin = std::min(umin, pu);
        umax = std::max(umax, pu);
        vmin = std::min(vmin, pv);
        vmax = std::max(vmax, pv);
      }
      u0 = std::max(0, static_cast<int>(std::floor(umin)) - 1);
      u1 = std::min(w - 1, static_cast<int>(std::floor(umax)) + 1);
      v0 = std::max(0, static_cast<int>(std::floor(vmin)) - 1);
      v1 = std::min(h - 1, static_cast<int>(std::floor(vmax)) + 1);
    }

    // the ray only matters up to the far depth of the capsule
    const double ray_len = far + reach;
    for (int v = v0; v <= v1; ++v) {
      for (int u = u0; u <= u1; ++u) {
        if (mask.at(u, v)) continue;
        const Eigen::Vector3d dir((u + 0.5 - k.cx) / k.fx, (v + 0.5 - k.cy) / k.fy, 1.0);
        if (segment_segment_sq(Eigen::Vector3d::Zero(), dir * ray_len, a, b) <= reach_sq) mask.set(u, v);
      }
    }
  }
  return mask;
}

}  // namespace syncap::sim
