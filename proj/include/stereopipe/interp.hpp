#pragma once

#include "stereopipe/support.hpp"

namespace stereopipe {

struct InterpParams {
  int s_delta = 50;   // search radius, pixels, compared strictly (<)
  int epsilon = 15;   // disparity agreement threshold
  int c_const = 60;   // constant fallback disparity
};

// Fills every Empty cell of a sparse support grid, reading only the original
// Matched cells: nearest matched row neighbors on both sides within s_delta
// pixels (mean if they agree within epsilon, else min), otherwise the same
// rule vertically, otherwise c_const. Matched cells are untouched; the
// result has no Empty cells.
SupportGrid interpolate_grid(const SupportGrid& sparse, const InterpParams& p);

}  // namespace stereopipe
