#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "syncap/geometry/camera.hpp"

namespace syncap::geometry {

/// Unordered camera pair, stored with first < second.
struct CameraPair {
  std::size_t first = 0;
  std::size_t second = 0;

  auto operator<=>(const CameraPair&) const = default;
};

struct PairAngleRange {
  double min_deg = 20.0;
  double max_deg = 160.0;
};

/// Pairs whose image-plane normal angle lies in [min_deg, max_deg], in
/// lexicographic order. Throws InsufficientCameras for fewer than two cameras.
std::vector<CameraPair> valid_pairs(std::span<const Camera> cameras, PairAngleRange range = {});

}  // namespace syncap::geometry
