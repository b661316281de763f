#include "syncap/geometry/pairs.hpp"

#include "syncap/common/error.hpp"

namespace syncap::geometry {

std::vector<CameraPair> valid_pairs(std::span<const Camera> cameras, PairAngleRange range) {
  if (cameras.size() < 2) fail(ErrorCode::InsufficientCameras, "need at least two cameras");
  if (!(range.min_deg <= range.max_deg)) fail(ErrorCode::InvalidArgument, "min pair angle exceeds max pair angle");

  std::vector<CameraPair> pairs;
  for (std::size_t a = 0; a < cameras.size(); ++a) {
    for (std::size_t b = a + 1; b < cameras.size(); ++b) {
      const double alpha = pair_angle(cameras[a].pose, cameras[b].pose);
      if (alpha >= range.min_deg && alpha <= range.max_deg) pairs.push_back({a, b});
    }
  }
  return pairs;
}

}  // namespace syncap::geometry
