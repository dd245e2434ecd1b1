#include "stereopipe/interp.hpp"

#include <algorithm>
#include <cstdlib>

namespace stereopipe {

namespace {

// Mean of two disparities rounding half away from zero, or min when they
// disagree by more than epsilon.
inline std::int16_t pair_fill(int da, int db, int epsilon) {
  if (std::abs(da - db) <= epsilon)
    return static_cast<std::int16_t>((da + db + 1) / 2);
  return static_cast<std::int16_t>(std::min(da, db));
}

}  // namespace

SupportGrid interpolate_grid(const SupportGrid& sparse, const InterpParams& p) {
  SupportGrid out = sparse;
  const int gw = sparse.gw, gh = sparse.gh, step = sparse.step;

  // Nearest matched cell index per direction, -1 if none; computed from the
  // original matched set only, so the fill order cannot matter.
  std::vector<int> left(static_cast<std::size_t>(gw) * gh, -1);
  std::vector<int> right(left.size(), -1);
  std::vector<int> above(left.size(), -1);
  std::vector<int> below(left.size(), -1);
  auto idx = [gw](int i, int j) { return static_cast<std::size_t>(j) * gw + i; };

  for (int j = 0; j < gh; ++j) {
    int last = -1;
    for (int i = 0; i < gw; ++i) {
      left[idx(i, j)] = last;
      if (sparse.matched(i, j)) last = i;
    }
    last = -1;
    for (int i = gw - 1; i >= 0; --i) {
      right[idx(i, j)] = last;
      if (sparse.matched(i, j)) last = i;
    }
  }
  for (int i = 0; i < gw; ++i) {
    int last = -1;
    for (int j = 0; j < gh; ++j) {
      above[idx(i, j)] = last;
      if (sparse.matched(i, j)) last = j;
    }
    last = -1;
    for (int j = gh - 1; j >= 0; --j) {
      below[idx(i, j)] = last;
      if (sparse.matched(i, j)) last = j;
    }
  }

  for (int j = 0; j < gh; ++j) {
    for (int i = 0; i < gw; ++i) {
      if (sparse.cell(i, j).tag != Provenance::Empty) continue;
      const std::size_t k = idx(i, j);

      const int il = left[k], ir = right[k];
      if (il >= 0 && ir >= 0 && (i - il) * step < p.s_delta &&
          (ir - i) * step < p.s_delta) {
        out.cell(i, j) = {pair_fill(sparse.cell(il, j).d, sparse.cell(ir, j).d,
                                    p.epsilon),
                          Provenance::HInterp};
        continue;
      }

      const int jt = above[k], jb = below[k];
      if (jt >= 0 && jb >= 0 && (j - jt) * step < p.s_delta &&
          (jb - j) * step < p.s_delta) {
        out.cell(i, j) = {pair_fill(sparse.cell(i, jt).d, sparse.cell(i, jb).d,
                                    p.epsilon),
                          Provenance::VInterp};
        continue;
      }

      out.cell(i, j) = {static_cast<std::int16_t>(p.c_const), Provenance::Const};
    }
  }
  return out;
}

}  // namespace stereopipe
