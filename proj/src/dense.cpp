#include "stereopipe/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace stereopipe {

namespace {

void match_rows(const DescriptorSource& ref, const DescriptorSource& other,
                const TriangleMesh* mesh, const GridVector& gv,
                const DenseParams& p, int d_max, MatchDirection direction,
                int v0, int v1, DisparityMap& out) {
  const int w = ref.width();
  const int u_lo = kDescriptorMargin;
  const int u_hi = w - 1 - kDescriptorMargin;
  const int row_px = u_hi - u_lo + 1;
  std::vector<std::uint8_t> ref_row(static_cast<std::size_t>(row_px) *
                                    kDescriptorBytes);
  std::vector<std::uint8_t> other_row(ref_row.size());

  for (int v = v0; v < v1; ++v) {
    ref.fill_row(v, u_lo, u_hi + 1, ref_row.data());
    other.fill_row(v, u_lo, u_hi + 1, other_row.data());
    std::int16_t* out_row = out.values.data() + static_cast<std::size_t>(v) * w;

    for (int u = u_lo; u <= u_hi; ++u) {
      // Largest shift keeping the sampled position inside the margins.
      const int d_cap = direction == MatchDirection::LeftReference ? u - u_lo
                                                                   : u_hi - u;
      const int d_hi = std::min(d_max, d_cap);
      if (d_hi < 0) continue;

      std::optional<double> d0;
      if (mesh) d0 = prior_disparity(*mesh, u, v, d_max);
      int band_lo = 1, band_hi = 0;
      if (d0) {
        const int r = static_cast<int>(std::lround(*d0));
        band_lo = std::max(0, r - p.delta_prior);
        band_hi = std::min(d_hi, r + p.delta_prior);
      }
      const std::vector<std::int16_t>& shortlist = gv.at_pixel(u, v);

      const std::uint8_t* ref_desc =
          ref_row.data() + static_cast<std::size_t>(u - u_lo) * kDescriptorBytes;
      int best_d = -1;
      double best_e = 0.0;
      auto consider = [&](int d) {
        const int pos = direction == MatchDirection::LeftReference ? u - d
                                                                   : u + d;
        const std::uint8_t* cand =
            other_row.data() +
            static_cast<std::size_t>(pos - u_lo) * kDescriptorBytes;
        double e = l1_distance(ref_desc, cand);
        if (d0)
          e += p.lambda_prior *
               std::min(std::abs(d - *d0), static_cast<double>(p.t_prior));
        if (best_d < 0 || e < best_e) {
          best_d = d;
          best_e = e;
        }
      };

      // Ascending merge of the prior band and the shortlist; ties in energy
      // resolve toward the smaller disparity because of the strict compare.
      int b = band_lo;
      std::size_t g = 0;
      while (b <= band_hi || g < shortlist.size()) {
        int d;
        if (b > band_hi) {
          d = shortlist[g++];
        } else if (g >= shortlist.size() || b < shortlist[g]) {
          d = b++;
        } else if (shortlist[g] == b) {
          d = b++;
          ++g;
        } else {
          d = shortlist[g++];
        }
        if (d < 0 || d > d_hi) continue;
        consider(d);
      }

      if (best_d >= 0) out_row[u] = static_cast<std::int16_t>(best_d);
    }
  }
}

}  // namespace

DisparityMap dense_match(const DescriptorSource& ref, const DescriptorSource& other,
                         const TriangleMesh* mesh, const GridVector& gv,
                         const DenseParams& p, int d_max,
                         MatchDirection direction, int threads) {
  if (ref.width() != other.width() || ref.height() != other.height())
    throw std::invalid_argument("descriptor sources differ in size");
  const int w = ref.width(), h = ref.height();
  DisparityMap out(w, h);

  const int v_lo = kDescriptorMargin;
  const int v_hi = h - kDescriptorMargin;  // exclusive
  const int rows = v_hi - v_lo;
  threads = std::clamp(threads, 1, std::max(1, rows));
  if (threads == 1 || rows <= 0) {
    match_rows(ref, other, mesh, gv, p, d_max, direction, v_lo, v_hi, out);
    return out;
  }

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int a = v_lo + rows * t / threads;
    const int b = v_lo + rows * (t + 1) / threads;
    pool.emplace_back([&, a, b] {
      match_rows(ref, other, mesh, gv, p, d_max, direction, a, b, out);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

DisparityMap lr_consistency(const DisparityMap& left, const DisparityMap& right,
                            int lr_tol) {
  if (left.width != right.width || left.height != right.height)
    throw std::invalid_argument("disparity maps differ in size");
  DisparityMap out = left;
  for (int v = 0; v < left.height; ++v) {
    for (int u = 0; u < left.width; ++u) {
      const std::int16_t d = left.at(u, v);
      if (d == kInvalidDisparity) continue;
      const int ur = u - d;
      if (ur < 0 || ur >= left.width || !right.valid(ur, v) ||
          std::abs(d - right.at(ur, v)) > lr_tol)
        out.at(u, v) = kInvalidDisparity;
    }
  }
  return out;
}

DisparityMap gap_interpolate(const DisparityMap& map, int gap_max) {
  DisparityMap out = map;
  for (int v = 0; v < map.height; ++v) {
    int u = 0;
    while (u < map.width) {
      if (map.valid(u, v)) {
        ++u;
        continue;
      }
      const int run_start = u;
      while (u < map.width && !map.valid(u, v)) ++u;
      const int run_len = u - run_start;
      if (run_start == 0 || u == map.width || run_len > gap_max) continue;
      const std::int16_t fill =
          std::min(map.at(run_start - 1, v), map.at(u, v));
      for (int k = run_start; k < u; ++k) out.at(k, v) = fill;
    }
  }
  return out;
}

DisparityMap median_filter(const DisparityMap& map) {
  DisparityMap out = map;
  std::array<std::int16_t, 9> window;
  for (int v = 0; v < map.height; ++v) {
    for (int u = 0; u < map.width; ++u) {
      if (!map.valid(u, v)) continue;
      int n = 0;
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          const int uu = u + du, vv = v + dv;
          if (uu < 0 || vv < 0 || uu >= map.width || vv >= map.height) continue;
          if (map.valid(uu, vv)) window[n++] = map.at(uu, vv);
        }
      }
      std::sort(window.begin(), window.begin() + n);
      out.at(u, v) = window[(n - 1) / 2];
    }
  }
  return out;
}

}  // namespace stereopipe
