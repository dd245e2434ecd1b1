#include "stereopipe/gridvec.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace stereopipe {

namespace {

std::vector<std::int16_t> cell_candidates(const std::map<int, int>& freq,
                                          const GridVectorParams& params,
                                          int d_max) {
  if (freq.empty())
    return {static_cast<std::int16_t>(params.c_const)};

  // score(c) = number of pooled supports within +-1 of c
  std::map<int, int> score;
  for (const auto& [d, f] : freq) {
    const int lo = std::max(0, d - 1), hi = std::min(d_max, d + 1);
    for (int c = lo; c <= hi; ++c) score[c] += f;
  }

  std::vector<std::int16_t> out;
  if (static_cast<int>(score.size()) <= params.k_candidates) {
    for (const auto& [c, s] : score) out.push_back(static_cast<std::int16_t>(c));
    return out;
  }

  std::vector<std::pair<int, int>> ranked;  // (-score, candidate)
  ranked.reserve(score.size());
  for (const auto& [c, s] : score) ranked.emplace_back(-s, c);
  std::sort(ranked.begin(), ranked.end());
  ranked.resize(params.k_candidates);
  for (const auto& [neg, c] : ranked) out.push_back(static_cast<std::int16_t>(c));
  std::sort(out.begin(), out.end());
  return out;
}

GridVector pool(const std::vector<std::map<int, int>>& bucket_freq, int gcw,
                int gch, const GridVectorParams& params, int d_max) {
  GridVector gv;
  gv.cell_size = params.cell_size;
  gv.gcw = gcw;
  gv.gch = gch;
  gv.cells.resize(static_cast<std::size_t>(gcw) * gch);
  std::map<int, int> freq;
  for (int cj = 0; cj < gch; ++cj) {
    for (int ci = 0; ci < gcw; ++ci) {
      freq.clear();
      for (int nj = std::max(0, cj - 1); nj <= std::min(gch - 1, cj + 1); ++nj)
        for (int ni = std::max(0, ci - 1); ni <= std::min(gcw - 1, ci + 1); ++ni)
          for (const auto& [d, f] : bucket_freq[static_cast<std::size_t>(nj) * gcw + ni])
            freq[d] += f;
      gv.cells[static_cast<std::size_t>(cj) * gcw + ci] =
          cell_candidates(freq, params, d_max);
    }
  }
  return gv;
}

}  // namespace

GridVector build_grid_vector(std::span<const SupportPoint> points,
                             const GridVectorParams& params, int width,
                             int height, int d_max) {
  if (params.cell_size < 1 || params.k_candidates < 1 || width < 1 ||
      height < 1)
    throw std::invalid_argument("bad grid vector parameters");
  const int gcw = (width + params.cell_size - 1) / params.cell_size;
  const int gch = (height + params.cell_size - 1) / params.cell_size;
  std::vector<std::map<int, int>> bucket_freq(static_cast<std::size_t>(gcw) *
                                              gch);
  for (const auto& p : points) {
    if (p.u < 0 || p.u >= width || p.v < 0 || p.v >= height) continue;
    const int ci = p.u / params.cell_size, cj = p.v / params.cell_size;
    ++bucket_freq[static_cast<std::size_t>(cj) * gcw + ci][p.d];
  }
  return pool(bucket_freq, gcw, gch, params, d_max);
}

GridVector build_grid_vector(const SupportGrid& grid,
                             const GridVectorParams& params, int width,
                             int height, int d_max) {
  const std::vector<SupportPoint> pts = matched_points(grid);
  return build_grid_vector(pts, params, width, height, d_max);
}

}  // namespace stereopipe
