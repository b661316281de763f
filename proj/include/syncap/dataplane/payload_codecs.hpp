#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "syncap/geometry/mask.hpp"
#include "syncap/geometry/skeleton.hpp"

namespace syncap::dataplane {

// JOINTS2D: M x (f64 x, f64 y, f64 confidence). MISSING is confidence 0
// with NaN coordinates.
inline constexpr std::size_t kJointBytes = 3 * sizeof(double);

std::vector<std::uint8_t> encode_joints(const geometry::Skeleton2D& skeleton);

/// Throws TruncatedInput when the length is not a whole number of joints
/// and InvalidArgument when it holds other than `joint_count` joints.
geometry::Skeleton2D decode_joints(std::span<const std::uint8_t> bytes, std::size_t joint_count);

// SILHOUETTE: u16 width, u16 height, then u32 run lengths alternating
// background / foreground, starting with a (possibly empty) background run.
std::vector<std::uint8_t> encode_silhouette(const geometry::Mask& mask);

/// Throws TruncatedInput or InvalidArgument when runs do not cover the mask exactly.
geometry::Mask decode_silhouette(std::span<const std::uint8_t> bytes);

}  // namespace syncap::dataplane
