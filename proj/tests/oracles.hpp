#pragma once

// Brute-force reference implementations, written straight from the stated
// rules with no shortcuts shared with the library. These are frozen: when a
// library module and its oracle disagree, the library is wrong.

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stereopipe/dense.hpp"
#include "stereopipe/descriptor.hpp"
#include "stereopipe/gridvec.hpp"
#include "stereopipe/image.hpp"
#include "stereopipe/interp.hpp"
#include "stereopipe/mesh.hpp"
#include "stereopipe/support.hpp"

namespace oracle {

using namespace stereopipe;

// ---------------------------------------------------------------- support

inline SupportGrid match_support(const SobelPair& left, const SobelPair& right,
                                 const MatchParams& p) {
  SupportGrid g = make_support_lattice(left.width, left.height, p.step);
  const int margin = kDescriptorMargin;
  const int u_max = left.width - 1 - margin;
  for (int j = 0; j < g.gh; ++j) {
    const int v = g.pixel_v(j);
    for (int i = 0; i < g.gw; ++i) {
      const int u = g.pixel_u(i);
      const int d_hi = std::min(p.d_max, u - margin);
      const Descriptor16 anchor = descriptor_at(left, u, v);

      std::vector<int> cost(d_hi + 1);
      for (int d = 0; d <= d_hi; ++d) {
        const Descriptor16 cand = descriptor_at(right, u - d, v);
        cost[d] = l1_distance(anchor.data(), cand.data());
      }
      int best = 0;
      for (int d = 1; d <= d_hi; ++d)
        if (cost[d] < cost[best]) best = d;

      int second = -1;
      for (int d = 0; d <= d_hi; ++d) {
        if (std::abs(d - best) < 2) continue;
        if (second < 0 || cost[d] < second) second = cost[d];
      }
      if (second >= 0 && static_cast<double>(cost[best]) > p.tau_ratio * second)
        continue;

      const int ur = u - best;
      const int back_hi = std::min(p.d_max, u_max - ur);
      const Descriptor16 r_anchor = descriptor_at(right, ur, v);
      int back_best = 0, back_cost = INT_MAX;
      for (int d = 0; d <= back_hi; ++d) {
        const Descriptor16 cand = descriptor_at(left, ur + d, v);
        const int c = l1_distance(r_anchor.data(), cand.data());
        if (c < back_cost) {
          back_cost = c;
          back_best = d;
        }
      }
      if (std::abs(back_best - best) > 1) continue;

      g.cell(i, j) = {static_cast<std::int16_t>(best), Provenance::Matched};
    }
  }
  return g;
}

// Rule (1), one parallel application against a snapshot.
inline SupportGrid filter_implausible_once(const SupportGrid& g, int window,
                                           int d_tol, int n_min) {
  SupportGrid out = g;
  for (int j = 0; j < g.gh; ++j) {
    for (int i = 0; i < g.gw; ++i) {
      if (!g.matched(i, j)) continue;
      int supporters = 0;
      for (int jj = 0; jj < g.gh; ++jj) {
        for (int ii = 0; ii < g.gw; ++ii) {
          if (ii == i && jj == j) continue;
          if (std::abs(ii - i) > window || std::abs(jj - j) > window) continue;
          if (!g.matched(ii, jj)) continue;
          if (std::abs(g.cell(ii, jj).d - g.cell(i, j).d) <= d_tol)
            ++supporters;
        }
      }
      if (supporters < n_min) out.cell(i, j) = SupportCell{};
    }
  }
  return out;
}

inline bool same_matched(const SupportGrid& a, const SupportGrid& b) {
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    if ((a.cells[k].tag == Provenance::Matched) !=
        (b.cells[k].tag == Provenance::Matched))
      return false;
    if (a.cells[k].tag == Provenance::Matched &&
        a.cells[k].d != b.cells[k].d)
      return false;
  }
  return true;
}

inline SupportGrid filter_supports(const SupportGrid& g, int window, int d_tol,
                                   int n_min) {
  // Rule (1) iterated until nothing changes.
  SupportGrid cur = g;
  for (;;) {
    SupportGrid next = filter_implausible_once(cur, window, d_tol, n_min);
    if (same_matched(cur, next)) break;
    cur = next;
  }

  // Rule (2) judged against the fixed rule-(1) snapshot.
  SupportGrid out = cur;
  for (int j = 0; j < cur.gh; ++j) {
    for (int i = 0; i < cur.gw; ++i) {
      if (!cur.matched(i, j)) continue;
      const int d = cur.cell(i, j).d;
      auto nearest_d = [&](int di, int dj) -> int {
        for (int s = 1; s <= window; ++s) {
          const int ii = i + di * s, jj = j + dj * s;
          if (ii < 0 || ii >= cur.gw || jj < 0 || jj >= cur.gh) break;
          if (cur.matched(ii, jj)) return cur.cell(ii, jj).d;
        }
        return -1;
      };
      const int l = nearest_d(-1, 0), r = nearest_d(+1, 0);
      const int t = nearest_d(0, -1), b = nearest_d(0, +1);
      if ((l == d && r == d) || (t == d && b == d)) out.cell(i, j) = SupportCell{};
    }
  }
  return out;
}

// ----------------------------------------------------------------- interp

inline SupportGrid interpolate_grid(const SupportGrid& g,
                                    const InterpParams& p) {
  SupportGrid out = g;
  for (int j = 0; j < g.gh; ++j) {
    for (int i = 0; i < g.gw; ++i) {
      if (g.cell(i, j).tag != Provenance::Empty) continue;

      auto scan = [&](int di, int dj) -> int {  // nearest matched index delta
        for (int s = 1;; ++s) {
          const int ii = i + di * s, jj = j + dj * s;
          if (ii < 0 || ii >= g.gw || jj < 0 || jj >= g.gh) return -1;
          if (g.matched(ii, jj)) return s;
        }
      };
      auto fill = [&](int da, int db) -> std::int16_t {
        if (std::abs(da - db) <= p.epsilon)
          return static_cast<std::int16_t>((da + db + 1) / 2);
        return static_cast<std::int16_t>(std::min(da, db));
      };

      const int sl = scan(-1, 0), sr = scan(+1, 0);
      if (sl > 0 && sr > 0 && sl * g.step < p.s_delta &&
          sr * g.step < p.s_delta) {
        out.cell(i, j) = {fill(g.cell(i - sl, j).d, g.cell(i + sr, j).d),
                          Provenance::HInterp};
        continue;
      }
      const int st = scan(0, -1), sb = scan(0, +1);
      if (st > 0 && sb > 0 && st * g.step < p.s_delta &&
          sb * g.step < p.s_delta) {
        out.cell(i, j) = {fill(g.cell(i, j - st).d, g.cell(i, j + sb).d),
                          Provenance::VInterp};
        continue;
      }
      out.cell(i, j) = {static_cast<std::int16_t>(p.c_const),
                        Provenance::Const};
    }
  }
  return out;
}

// ---------------------------------------------------------------- gridvec

inline GridVector build_grid_vector(std::span<const SupportPoint> points,
                                    const GridVectorParams& p, int width,
                                    int height, int d_max) {
  GridVector gv;
  gv.cell_size = p.cell_size;
  gv.gcw = (width + p.cell_size - 1) / p.cell_size;
  gv.gch = (height + p.cell_size - 1) / p.cell_size;
  gv.cells.resize(static_cast<std::size_t>(gv.gcw) * gv.gch);

  for (int cj = 0; cj < gv.gch; ++cj) {
    for (int ci = 0; ci < gv.gcw; ++ci) {
      std::vector<int> pooled;
      for (const auto& pt : points) {
        if (pt.u < 0 || pt.u >= width || pt.v < 0 || pt.v >= height) continue;
        const int pi = pt.u / p.cell_size, pj = pt.v / p.cell_size;
        if (std::abs(pi - ci) <= 1 && std::abs(pj - cj) <= 1)
          pooled.push_back(pt.d);
      }
      auto& out = gv.cells[static_cast<std::size_t>(cj) * gv.gcw + ci];
      if (pooled.empty()) {
        out = {static_cast<std::int16_t>(p.c_const)};
        continue;
      }
      // candidate = any value within 1 of a pooled disparity; its score is
      // how many pooled disparities sit within 1 of it
      std::vector<std::pair<int, int>> scored;  // (candidate, score)
      for (int c = 0; c <= d_max; ++c) {
        int s = 0;
        for (int d : pooled)
          if (std::abs(d - c) <= 1) ++s;
        if (s > 0) scored.emplace_back(c, s);
      }
      if (static_cast<int>(scored.size()) > p.k_candidates) {
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& a, const auto& b) {
                           if (a.second != b.second) return a.second > b.second;
                           return a.first < b.first;
                         });
        scored.resize(p.k_candidates);
        std::sort(scored.begin(), scored.end());
      }
      for (const auto& [c, s] : scored)
        out.push_back(static_cast<std::int16_t>(c));
    }
  }
  return gv;
}

// ------------------------------------------------------------------ dense

inline DisparityMap dense_match(const SobelPair& ref, const SobelPair& other,
                                const TriangleMesh* mesh, const GridVector& gv,
                                const DenseParams& p, int d_max,
                                MatchDirection dir) {
  const int w = ref.width, h = ref.height;
  const int margin = kDescriptorMargin;
  DisparityMap out(w, h);
  for (int v = margin; v <= h - 1 - margin; ++v) {
    for (int u = margin; u <= w - 1 - margin; ++u) {
      const int d_cap =
          dir == MatchDirection::LeftReference ? u - margin : w - 1 - margin - u;
      const int d_hi = std::min(d_max, d_cap);
      if (d_hi < 0) continue;

      std::optional<double> d0;
      if (mesh) d0 = prior_disparity(*mesh, u, v, d_max);

      std::vector<int> cands;
      if (d0) {
        const int r = static_cast<int>(std::lround(*d0));
        for (int d = r - p.delta_prior; d <= r + p.delta_prior; ++d)
          cands.push_back(d);
      }
      for (std::int16_t d : gv.at_pixel(u, v)) cands.push_back(d);
      std::sort(cands.begin(), cands.end());
      cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

      const Descriptor16 anchor = descriptor_at(ref, u, v);
      int best_d = -1;
      double best_e = 0.0;
      for (int d : cands) {
        if (d < 0 || d > d_hi) continue;
        const int pos = dir == MatchDirection::LeftReference ? u - d : u + d;
        const Descriptor16 cand = descriptor_at(other, pos, v);
        double e = l1_distance(anchor.data(), cand.data());
        if (d0)
          e += p.lambda_prior *
               std::min(std::abs(d - *d0), static_cast<double>(p.t_prior));
        if (best_d < 0 || e < best_e) {
          best_d = d;
          best_e = e;
        }
      }
      if (best_d >= 0) out.at(u, v) = static_cast<std::int16_t>(best_d);
    }
  }
  return out;
}

inline DisparityMap lr_consistency(const DisparityMap& left,
                                   const DisparityMap& right, int lr_tol) {
  DisparityMap out = left;
  for (int v = 0; v < left.height; ++v) {
    for (int u = 0; u < left.width; ++u) {
      if (!left.valid(u, v)) continue;
      const int d = left.at(u, v);
      const int ur = u - d;
      const bool ok = ur >= 0 && ur < left.width && right.valid(ur, v) &&
                      std::abs(d - right.at(ur, v)) <= lr_tol;
      if (!ok) out.at(u, v) = kInvalidDisparity;
    }
  }
  return out;
}

inline DisparityMap gap_interpolate(const DisparityMap& m, int gap_max) {
  DisparityMap out = m;
  for (int v = 0; v < m.height; ++v) {
    for (int u = 0; u < m.width; ++u) {
      if (m.valid(u, v)) continue;
      int a = u;
      while (a > 0 && !m.valid(a - 1, v)) --a;
      int b = u;
      while (b < m.width - 1 && !m.valid(b + 1, v)) ++b;
      if (a == 0 || b == m.width - 1) continue;
      if (b - a + 1 > gap_max) continue;
      out.at(u, v) = std::min(m.at(a - 1, v), m.at(b + 1, v));
    }
  }
  return out;
}

inline DisparityMap median_filter(const DisparityMap& m) {
  DisparityMap out = m;
  for (int v = 0; v < m.height; ++v) {
    for (int u = 0; u < m.width; ++u) {
      if (!m.valid(u, v)) continue;
      std::vector<std::int16_t> vals;
      for (int dv = -1; dv <= 1; ++dv)
        for (int du = -1; du <= 1; ++du) {
          const int uu = u + du, vv = v + dv;
          if (uu >= 0 && vv >= 0 && uu < m.width && vv < m.height &&
              m.valid(uu, vv))
            vals.push_back(m.at(uu, vv));
        }
      std::sort(vals.begin(), vals.end());
      out.at(u, v) = vals[(vals.size() - 1) / 2];
    }
  }
  return out;
}

// ------------------------------------------------------------------- mesh

// Empty-circumcircle property: no mesh vertex lies inside any triangle's
// circumcircle by more than tol (distance to circumcenter >= radius - tol).
inline bool empty_circumcircles(const TriangleMesh& m, double tol) {
  for (const auto& t : m.triangles) {
    const MeshVertex& a = m.vertices[t[0]];
    const MeshVertex& b = m.vertices[t[1]];
    const MeshVertex& c = m.vertices[t[2]];
    const double d = 2.0 * (a.u * (b.v - c.v) + b.u * (c.v - a.v) +
                            c.u * (a.v - b.v));
    if (d == 0.0) return false;  // degenerate triangle
    const double a2 = a.u * a.u + a.v * a.v;
    const double b2 = b.u * b.u + b.v * b.v;
    const double c2 = c.u * c.u + c.v * c.v;
    const double cx = (a2 * (b.v - c.v) + b2 * (c.v - a.v) + c2 * (a.v - b.v)) / d;
    const double cy = (a2 * (c.u - b.u) + b2 * (a.u - c.u) + c2 * (b.u - a.u)) / d;
    const double r = std::hypot(a.u - cx, a.v - cy);
    for (std::size_t k = 0; k < m.vertices.size(); ++k) {
      if (static_cast<int>(k) == t[0] || static_cast<int>(k) == t[1] ||
          static_cast<int>(k) == t[2])
        continue;
      const double dist = std::hypot(m.vertices[k].u - cx, m.vertices[k].v - cy);
      if (dist < r - tol) return false;
    }
  }
  return true;
}

}  // namespace oracle
