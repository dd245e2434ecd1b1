#pragma once

#include <cstdint>
#include <vector>

#include "stereopipe/descriptor.hpp"

namespace stereopipe {

// How a support cell got its disparity.
enum class Provenance : std::uint8_t {
  Empty,
  Matched,
  HInterp,
  VInterp,
  Const,
};

struct SupportCell {
  std::int16_t d = kInvalidDisparity;
  Provenance tag = Provenance::Empty;
};

struct SupportPoint {
  int u = 0;
  int v = 0;
  int d = 0;
};

// Lattice of candidate support positions. Cell (i, j) sits at pixel
// (origin_u + i*step, origin_v + j*step), inside the descriptor-valid region.
struct SupportGrid {
  int step = 5;
  int gw = 0;
  int gh = 0;
  int origin_u = kDescriptorMargin;
  int origin_v = kDescriptorMargin;
  std::vector<SupportCell> cells;

  const SupportCell& cell(int i, int j) const {
    return cells[static_cast<std::size_t>(j) * gw + i];
  }
  SupportCell& cell(int i, int j) {
    return cells[static_cast<std::size_t>(j) * gw + i];
  }
  int pixel_u(int i) const { return origin_u + i * step; }
  int pixel_v(int j) const { return origin_v + j * step; }
  bool matched(int i, int j) const {
    return cell(i, j).tag == Provenance::Matched;
  }
  std::size_t count(Provenance tag) const;
};

struct MatchParams {
  int d_max = 127;
  double tau_ratio = 0.9;
  int step = 5;
};

// Lattice geometry covering the descriptor-valid region of a width x height
// image, all cells Empty.
SupportGrid make_support_lattice(int width, int height, int step);

// Sparse support extraction. For every lattice point the full disparity
// range [0, d_max] is scanned (clipped so the right descriptor stays in the
// valid margin); a candidate is kept only if it wins the best/second-best
// ratio test and the left-right re-match lands within one pixel.
SupportGrid match_support(const DescriptorSource& left,
                          const DescriptorSource& right,
                          const MatchParams& params);

// Removes implausible supports (fewer than n_min similar neighbors inside a
// (2*window+1)^2 cell neighborhood; the parallel removal is iterated to a
// fixed point) and then redundant ones (nearest surviving row or column
// neighbors on both sides all carry the same disparity, judged against the
// pass-1 snapshot).
SupportGrid filter_supports(const SupportGrid& g, int window, int d_tol,
                            int n_min);

// Pixel-space positions of all MATCHED cells, row-major cell order.
std::vector<SupportPoint> matched_points(const SupportGrid& g);

}  // namespace stereopipe
