#include "stereopipe/support.hpp"

#include <algorithm>
#include <stdexcept>

namespace stereopipe {

std::size_t SupportGrid::count(Provenance tag) const {
  std::size_t n = 0;
  for (const auto& c : cells)
    if (c.tag == tag) ++n;
  return n;
}

SupportGrid make_support_lattice(int width, int height, int step) {
  if (step < 1) throw std::invalid_argument("lattice step must be >= 1");
  if (width < kMinImageSize || height < kMinImageSize)
    throw std::invalid_argument("image too small for a support lattice");
  const int lo = kDescriptorMargin;
  const int hi_u = width - kDescriptorMargin - 1;
  const int hi_v = height - kDescriptorMargin - 1;
  SupportGrid g;
  g.step = step;
  g.origin_u = lo;
  g.origin_v = lo;
  g.gw = (hi_u - lo) / step + 1;
  g.gh = (hi_v - lo) / step + 1;
  g.cells.assign(static_cast<std::size_t>(g.gw) * g.gh, SupportCell{});
  return g;
}

namespace {

// argmin over d in [0, d_hi] of L1(anchor, row + (base + dir*d)*16),
// ties toward smaller d. Returns {best_d, best_cost}.
inline std::pair<int, int> scan_range(const std::uint8_t* anchor,
                                      const std::uint8_t* row, int base,
                                      int dir, int d_hi) {
  int best_d = 0;
  int best_cost =
      l1_distance(anchor, row + static_cast<std::size_t>(base) * 16);
  for (int d = 1; d <= d_hi; ++d) {
    const int cost = l1_distance(
        anchor, row + static_cast<std::size_t>(base + dir * d) * 16);
    if (cost < best_cost) {
      best_cost = cost;
      best_d = d;
    }
  }
  return {best_d, best_cost};
}

}  // namespace

SupportGrid match_support(const DescriptorSource& left,
                          const DescriptorSource& right,
                          const MatchParams& params) {
  if (left.width() != right.width() || left.height() != right.height())
    throw std::invalid_argument("descriptor fields differ in size");
  const int w = left.width();
  SupportGrid g = make_support_lattice(w, left.height(), params.step);

  const int u_lo = kDescriptorMargin;
  const int u_hi = w - kDescriptorMargin - 1;  // inclusive
  const int row_px = u_hi - u_lo + 1;
  std::vector<std::uint8_t> row_l(static_cast<std::size_t>(row_px) * 16);
  std::vector<std::uint8_t> row_r(row_l.size());

  for (int j = 0; j < g.gh; ++j) {
    const int v = g.pixel_v(j);
    left.fill_row(v, u_lo, u_hi + 1, row_l.data());
    right.fill_row(v, u_lo, u_hi + 1, row_r.data());

    for (int i = 0; i < g.gw; ++i) {
      const int u = g.pixel_u(i);
      const int base = u - u_lo;
      const int d_hi = std::min(params.d_max, u - u_lo);
      const std::uint8_t* anchor =
          row_l.data() + static_cast<std::size_t>(base) * 16;

      const auto [best_d, best_cost] =
          scan_range(anchor, row_r.data(), base, -1, d_hi);

      // Ratio test against the best candidate at least 2 disparities away.
      // With no such candidate the test passes vacuously.
      int second = -1;
      for (int d = 0; d <= d_hi; ++d) {
        if (d >= best_d - 1 && d <= best_d + 1) continue;
        const int cost = l1_distance(
            anchor, row_r.data() + static_cast<std::size_t>(base - d) * 16);
        if (second < 0 || cost < second) second = cost;
      }
      if (second >= 0 &&
          static_cast<double>(best_cost) > params.tau_ratio * second)
        continue;

      // Left-right check: re-match from the chosen right pixel and require
      // the recovered left position within one pixel of u.
      const int ur = base - best_d;
      const int back_hi = std::min(params.d_max, row_px - 1 - ur);
      const std::uint8_t* r_anchor =
          row_r.data() + static_cast<std::size_t>(ur) * 16;
      const auto [back_d, back_cost] =
          scan_range(r_anchor, row_l.data(), ur, +1, back_hi);
      (void)back_cost;
      if (back_d < best_d - 1 || back_d > best_d + 1) continue;

      g.cell(i, j) = {static_cast<std::int16_t>(best_d), Provenance::Matched};
    }
  }
  return g;
}

namespace {

// One parallel pass of the implausibility rule against a fixed snapshot.
// Returns true if anything was cleared.
bool implausible_pass(const SupportGrid& in, SupportGrid& out, int window,
                      int d_tol, int n_min) {
  bool changed = false;
  out = in;
  for (int j = 0; j < in.gh; ++j) {
    for (int i = 0; i < in.gw; ++i) {
      if (!in.matched(i, j)) continue;
      const int d = in.cell(i, j).d;
      int supporters = 0;
      const int i0 = std::max(0, i - window), i1 = std::min(in.gw - 1, i + window);
      const int j0 = std::max(0, j - window), j1 = std::min(in.gh - 1, j + window);
      for (int jj = j0; jj <= j1 && supporters < n_min; ++jj) {
        for (int ii = i0; ii <= i1; ++ii) {
          if (ii == i && jj == j) continue;
          if (!in.matched(ii, jj)) continue;
          if (std::abs(in.cell(ii, jj).d - d) <= d_tol &&
              ++supporters >= n_min)
            break;
        }
      }
      if (supporters < n_min) {
        out.cell(i, j) = SupportCell{};
        changed = true;
      }
    }
  }
  return changed;
}

}  // namespace

SupportGrid filter_supports(const SupportGrid& g, int window, int d_tol,
                            int n_min) {
  // Pass 1: iterate the snapshot rule to a fixed point so the result is
  // scan-order independent and idempotent.
  SupportGrid cur = g;
  SupportGrid next;
  while (implausible_pass(cur, next, window, d_tol, n_min))
    cur = next;

  // Pass 2: redundant removal, judged against the fixed pass-1 snapshot.
  const SupportGrid& snap = cur;
  SupportGrid out = snap;
  for (int j = 0; j < snap.gh; ++j) {
    for (int i = 0; i < snap.gw; ++i) {
      if (!snap.matched(i, j)) continue;
      const int d = snap.cell(i, j).d;

      auto nearest = [&](int di, int dj) -> const SupportCell* {
        for (int s = 1; s <= window; ++s) {
          const int ii = i + di * s, jj = j + dj * s;
          if (ii < 0 || ii >= snap.gw || jj < 0 || jj >= snap.gh) return nullptr;
          if (snap.matched(ii, jj)) return &snap.cell(ii, jj);
        }
        return nullptr;
      };

      const SupportCell* l = nearest(-1, 0);
      const SupportCell* r = nearest(+1, 0);
      const SupportCell* t = nearest(0, -1);
      const SupportCell* b = nearest(0, +1);
      const bool row_redundant = l && r && l->d == d && r->d == d;
      const bool col_redundant = t && b && t->d == d && b->d == d;
      if (row_redundant || col_redundant) out.cell(i, j) = SupportCell{};
    }
  }
  return out;
}

std::vector<SupportPoint> matched_points(const SupportGrid& g) {
  std::vector<SupportPoint> pts;
  for (int j = 0; j < g.gh; ++j)
    for (int i = 0; i < g.gw; ++i)
      if (g.matched(i, j))
        pts.push_back({g.pixel_u(i), g.pixel_v(j), g.cell(i, j).d});
  return pts;
}

}  // namespace stereopipe
