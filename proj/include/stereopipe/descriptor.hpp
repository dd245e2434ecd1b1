#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "stereopipe/image.hpp"

namespace stereopipe {

// Per-pixel 8-bit encoded Sobel responses. Raw responses r (range +-1020)
// are stored as clamp(r/4 + 128, 0, 255); the 1-pixel border frame encodes
// zero response (128).
struct SobelPair {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> horiz;
  std::vector<std::uint8_t> vert;

  std::uint8_t h_at(int u, int v) const {
    return horiz[static_cast<std::size_t>(v) * width + u];
  }
  std::uint8_t v_at(int u, int v) const {
    return vert[static_cast<std::size_t>(v) * width + u];
  }
  // Lazy view cost: 2 bytes per pixel.
  std::size_t byte_size() const { return horiz.size() + vert.size(); }
};

// Raw 3x3 responses before encoding. Valid for 1 <= u < width-1,
// 1 <= v < height-1.
int sobel_raw_horiz(const GrayImage& img, int u, int v);
int sobel_raw_vert(const GrayImage& img, int u, int v);

inline std::uint8_t encode_sobel(int raw) {
  int e = raw / 4 + 128;  // truncating division toward zero
  if (e < 0) e = 0;
  if (e > 255) e = 255;
  return static_cast<std::uint8_t>(e);
}

// Throws std::invalid_argument if the image is below the minimum size.
SobelPair sobel(const GrayImage& img);

// 16-byte feature sampled from the Sobel responses around a pixel.
using Descriptor16 = std::array<std::uint8_t, 16>;

inline constexpr int kDescriptorBytes = 16;
// Descriptors are undefined within this frame of the image edge.
inline constexpr int kDescriptorMargin = 2;

// Sample offsets (du, dv) relative to the descriptor pixel. The first 12
// samples come from the horizontal response, the last 4 from the vertical.
inline constexpr std::array<std::pair<int, int>, 12> kHorizOffsets = {{
    {-2, 0}, {-1, -1}, {-1, 0}, {-1, 1}, {0, -2}, {0, -1},
    {0, 0},  {0, 1},   {0, 2},  {1, -1}, {1, 0},  {1, 1},
}};
inline constexpr std::array<std::pair<int, int>, 4> kVertOffsets = {{
    {0, -1}, {-1, 0}, {0, 1}, {1, 0},
}};

// Assembles the descriptor on the fly from the 2-bytes-per-pixel Sobel
// view. Requires kDescriptorMargin <= u < width - kDescriptorMargin and
// likewise for v; throws std::out_of_range otherwise.
Descriptor16 descriptor_at(const SobelPair& sob, int u, int v);

// Dense precomputed field, 16 bytes per pixel.
struct DescriptorField {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bytes;

  const std::uint8_t* at(int u, int v) const {
    return bytes.data() +
           (static_cast<std::size_t>(v) * width + u) * kDescriptorBytes;
  }
  std::size_t byte_size() const { return bytes.size(); }
};

DescriptorField build_descriptor_field(const SobelPair& sob);

// Non-owning handle over either representation. Matching code assembles
// whole rows through this so the lazy path stays cheap.
class DescriptorSource {
 public:
  explicit DescriptorSource(const SobelPair& sob) : sob_(&sob) {}
  explicit DescriptorSource(const DescriptorField& field) : field_(&field) {}

  int width() const { return sob_ ? sob_->width : field_->width; }
  int height() const { return sob_ ? sob_->height : field_->height; }

  void fill(int u, int v, std::uint8_t* out) const;
  // Fills descriptors for u in [u0, u1) at row v, 16 bytes per pixel.
  void fill_row(int v, int u0, int u1, std::uint8_t* out) const;

 private:
  const SobelPair* sob_ = nullptr;
  const DescriptorField* field_ = nullptr;
};

inline int l1_distance(const std::uint8_t* a, const std::uint8_t* b) {
  int sum = 0;
  for (int i = 0; i < kDescriptorBytes; ++i) {
    const int diff = static_cast<int>(a[i]) - static_cast<int>(b[i]);
    sum += diff < 0 ? -diff : diff;
  }
  return sum;
}

}  // namespace stereopipe
