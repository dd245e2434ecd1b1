#pragma once

#include "stereopipe/descriptor.hpp"
#include "stereopipe/gridvec.hpp"
#include "stereopipe/image.hpp"
#include "stereopipe/mesh.hpp"

namespace stereopipe {

struct DenseParams {
  double lambda_prior = 2.0;  // energy weight per disparity unit
  int delta_prior = 3;        // half-width of the prior candidate band
  int t_prior = 10;           // truncation of the prior penalty
  int gap_max = 7;            // longest invalid run filled by interpolation
  int lr_tol = 1;             // left-right consistency tolerance
};

enum class MatchDirection {
  LeftReference,   // other view sampled at u - d
  RightReference,  // other view sampled at u + d
};

// Per-pixel argmin of L1(descriptor(ref), descriptor(other shifted by d)) +
// lambda_prior * min(|d - prior|, t_prior) over the prior band united with
// the grid-vector shortlist. mesh == nullptr (or a pixel outside mesh
// coverage) drops the prior: grid-vector candidates only, data term only.
// Ties take the smaller disparity; empty candidate sets yield INVALID, as do
// the border rows/columns where no descriptor exists.
DisparityMap dense_match(const DescriptorSource& ref, const DescriptorSource& other,
                         const TriangleMesh* mesh, const GridVector& gv,
                         const DenseParams& p, int d_max,
                         MatchDirection direction, int threads = 1);

// Keeps left(q) iff right(q - left(q)) is valid and within lr_tol.
DisparityMap lr_consistency(const DisparityMap& left, const DisparityMap& right,
                            int lr_tol);

// Fills, per row, maximal invalid runs of length <= gap_max that have valid
// pixels on both sides with min(left flank, right flank).
DisparityMap gap_interpolate(const DisparityMap& map, int gap_max);

// 3x3 median over the valid pixels of the window; invalid pixels stay
// invalid; even counts take the lower middle.
DisparityMap median_filter(const DisparityMap& map);

}  // namespace stereopipe
