#pragma once

#include <cstdint>
#include <vector>

namespace stereopipe {

// Minimum image side for the 5x5 matching windows plus margins.
inline constexpr int kMinImageSize = 16;

// 8-bit single-channel raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // length == width * height

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int u, int v) const {
    return data[static_cast<std::size_t>(v) * width + u];
  }
  std::uint8_t& at(int u, int v) {
    return data[static_cast<std::size_t>(v) * width + u];
  }
  bool in_bounds(int u, int v) const {
    return u >= 0 && u < width && v >= 0 && v < height;
  }
};

// Marker for pixels without a disparity estimate. Valid values are 8-bit
// (0..255); storage is int16 so the marker never collides with a valid value.
inline constexpr std::int16_t kInvalidDisparity = -1;

// Per-pixel disparity with an explicit invalid marker.
struct DisparityMap {
  int width = 0;
  int height = 0;
  std::vector<std::int16_t> values;  // kInvalidDisparity or [0,255]

  DisparityMap() = default;
  DisparityMap(int w, int h, std::int16_t fill = kInvalidDisparity)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  std::int16_t at(int u, int v) const {
    return values[static_cast<std::size_t>(v) * width + u];
  }
  std::int16_t& at(int u, int v) {
    return values[static_cast<std::size_t>(v) * width + u];
  }
  bool valid(int u, int v) const { return at(u, v) >= 0; }

  bool operator==(const DisparityMap& o) const {
    return width == o.width && height == o.height && values == o.values;
  }
};

}  // namespace stereopipe
