#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stereopipe/support.hpp"

namespace stereopipe {

struct GridVectorParams {
  int cell_size = 20;     // macro-cell edge, pixels
  int k_candidates = 20;  // cap per macro-cell
  int c_const = 60;       // sole candidate for cells with no nearby support
};

// Per macro-cell shortlist of disparity candidates for the dense matcher.
struct GridVector {
  int cell_size = 0;
  int gcw = 0, gch = 0;
  std::vector<std::vector<std::int16_t>> cells;  // ascending, unique

  const std::vector<std::int16_t>& at_cell(int ci, int cj) const {
    return cells[static_cast<std::size_t>(cj) * gcw + ci];
  }
  const std::vector<std::int16_t>& at_pixel(int u, int v) const {
    return at_cell(u / cell_size, v / cell_size);
  }
};

// Pools MATCHED disparities from each macro-cell and its 8 neighbors, expands
// each by +-1 (clamped to [0, d_max]), and keeps at most k candidates by
// descending pooled frequency (ties toward the smaller disparity).
GridVector build_grid_vector(const SupportGrid& grid,
                             const GridVectorParams& params, int width,
                             int height, int d_max);

GridVector build_grid_vector(std::span<const SupportPoint> points,
                             const GridVectorParams& params, int width,
                             int height, int d_max);

}  // namespace stereopipe
