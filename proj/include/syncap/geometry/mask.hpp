#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace syncap::geometry {

/// Binary silhouette, row-major, one byte per pixel (0 background, 1 foreground).
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  bool at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) { pixels[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto p : pixels) n += p != 0;
    return n;
  }

  bool operator==(const Mask&) const = default;
};

}  // namespace syncap::geometry
