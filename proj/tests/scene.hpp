#pragma once

// Deterministic synthetic stereo scenes with exact integer ground truth.
// The left view samples a procedural texture; the right view is built by
// forward-warping left pixels (nearest surface wins), so correspondences are
// exact and occlusions are modeled. Ground truth is left-referenced and
// invalid where the left pixel is occluded in the right view or warps out
// of frame.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "stereopipe/image.hpp"
#include "stereopipe/support.hpp"

namespace scene {

using stereopipe::DisparityMap;
using stereopipe::GrayImage;
using stereopipe::kInvalidDisparity;

inline std::uint32_t hash3(std::uint32_t seed, int x, int y) {
  std::uint64_t h = seed;
  h ^= static_cast<std::uint32_t>(x) * 0x9E3779B97F4A7C15ull;
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ull;
  h ^= static_cast<std::uint32_t>(y) * 0x94D049BB133111EBull;
  h = (h ^ (h >> 27)) * 0x2545F4914F6CDD1Dull;
  return static_cast<std::uint32_t>(h >> 32);
}

inline std::uint8_t texel(std::uint32_t seed, int x, int y) {
  return static_cast<std::uint8_t>(hash3(seed, x, y) & 0xFF);
}

struct Scene {
  GrayImage left, right;
  DisparityMap gt;
};

// Foreground boxes over a gently sloping background; sizes are fractions of
// the frame so the scene scales with the requested resolution.
inline int scene_disparity(int u, int v, int width, int height) {
  int d = 16 + (v * 6) / height;  // background: 16..21 staircase
  struct Box {
    double x0, y0, w, h;
    int d;
  };
  static constexpr Box kBoxes[] = {
      {0.10, 0.15, 0.18, 0.25, 34}, {0.35, 0.10, 0.15, 0.20, 44},
      {0.60, 0.22, 0.20, 0.30, 30}, {0.15, 0.55, 0.22, 0.28, 51},
      {0.48, 0.52, 0.16, 0.22, 38}, {0.72, 0.60, 0.18, 0.30, 55},
  };
  for (const Box& b : kBoxes) {
    const int x0 = static_cast<int>(b.x0 * width);
    const int y0 = static_cast<int>(b.y0 * height);
    const int x1 = x0 + static_cast<int>(b.w * width);
    const int y1 = y0 + static_cast<int>(b.h * height);
    if (u >= x0 && u < x1 && v >= y0 && v < y1) d = std::max(d, b.d);
  }
  return d;
}

inline Scene make_scene(int width, int height, std::uint32_t seed = 1) {
  Scene s;
  s.left = GrayImage(width, height);
  s.right = GrayImage(width, height);
  s.gt = DisparityMap(width, height);

  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u)
      s.left.at(u, v) = texel(seed, u, v);

  // Right view: filler texture first (dis-occluded areas), then the forward
  // warp where the largest disparity (nearest surface) claims each pixel.
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u)
      s.right.at(u, v) = texel(seed ^ 0xA5A5A5A5u, u + 4096, v);

  std::vector<int> win_d(width), win_u(width);
  for (int v = 0; v < height; ++v) {
    std::fill(win_d.begin(), win_d.end(), -1);
    std::fill(win_u.begin(), win_u.end(), -1);
    for (int u = 0; u < width; ++u) {
      const int d = scene_disparity(u, v, width, height);
      const int t = u - d;
      if (t < 0) continue;
      if (d > win_d[t]) {
        win_d[t] = d;
        win_u[t] = u;
      }
    }
    for (int t = 0; t < width; ++t)
      if (win_u[t] >= 0) s.right.at(t, v) = s.left.at(win_u[t], v);
    for (int u = 0; u < width; ++u) {
      const int d = scene_disparity(u, v, width, height);
      const int t = u - d;
      if (t >= 0 && win_u[t] == u)
        s.gt.at(u, v) = static_cast<std::int16_t>(d);
    }
  }
  return s;
}

// Pure translation: right(u) = tex(u + shift), left(u) = tex(u); every pixel
// of the common surface has disparity == shift.
inline Scene make_shift_scene(int width, int height, int shift,
                              std::uint32_t seed = 1) {
  Scene s;
  s.left = GrayImage(width, height);
  s.right = GrayImage(width, height);
  s.gt = DisparityMap(width, height);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      s.left.at(u, v) = texel(seed, u, v);
      s.right.at(u, v) = texel(seed, u + shift, v);
      if (u >= shift) s.gt.at(u, v) = static_cast<std::int16_t>(shift);
    }
  }
  return s;
}

// Random sparse support grid for oracle comparisons.
template <typename Rng>
stereopipe::SupportGrid random_sparse_grid(int gw, int gh, int step,
                                           double density, int d_max,
                                           Rng& rng) {
  stereopipe::SupportGrid g;
  g.step = step;
  g.gw = gw;
  g.gh = gh;
  g.origin_u = stereopipe::kDescriptorMargin;
  g.origin_v = stereopipe::kDescriptorMargin;
  g.cells.assign(static_cast<std::size_t>(gw) * gh, stereopipe::SupportCell{});
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> dd(0, d_max);
  for (auto& c : g.cells)
    if (coin(rng) < density)
      c = {static_cast<std::int16_t>(dd(rng)),
           stereopipe::Provenance::Matched};
  return g;
}

}  // namespace scene
