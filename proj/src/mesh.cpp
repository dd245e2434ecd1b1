#include "stereopipe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace stereopipe {

std::optional<PlaneCoeffs> solve_plane(const MeshVertex& p1,
                                       const MeshVertex& p2,
                                       const MeshVertex& p3) {
  const double det = p1.u * (p2.v - p3.v) - p1.v * (p2.u - p3.u) +
                     (p2.u * p3.v - p3.u * p2.v);
  if (det == 0.0) return std::nullopt;
  PlaneCoeffs pl;
  pl.a = (p1.d * (p2.v - p3.v) - p1.v * (p2.d - p3.d) +
          (p2.d * p3.v - p3.d * p2.v)) /
         det;
  pl.b = (p1.u * (p2.d - p3.d) - p1.d * (p2.u - p3.u) +
          (p2.u * p3.d - p3.u * p2.d)) /
         det;
  pl.c = (p1.u * (p2.v * p3.d - p3.v * p2.d) -
          p1.v * (p2.u * p3.d - p3.u * p2.d) +
          p1.d * (p2.u * p3.v - p3.u * p2.v)) /
         det;
  return pl;
}

TriangleMesh regular_triangulate(const SupportGrid& dense) {
  if (dense.gw < 2 || dense.gh < 2)
    throw std::invalid_argument("regular triangulation needs a >=2x2 grid");

  TriangleMesh m;
  m.vertices.reserve(static_cast<std::size_t>(dense.gw) * dense.gh);
  for (int j = 0; j < dense.gh; ++j) {
    for (int i = 0; i < dense.gw; ++i) {
      const SupportCell& c = dense.cell(i, j);
      if (c.tag == Provenance::Empty)
        throw std::invalid_argument("regular triangulation needs a dense grid");
      m.vertices.push_back({static_cast<double>(dense.pixel_u(i)),
                            static_cast<double>(dense.pixel_v(j)),
                            static_cast<double>(c.d)});
    }
  }

  auto vid = [&](int i, int j) { return j * dense.gw + i; };
  m.triangles.reserve(2 * static_cast<std::size_t>(dense.gw - 1) *
                      (dense.gh - 1));
  for (int j = 0; j + 1 < dense.gh; ++j) {
    for (int i = 0; i + 1 < dense.gw; ++i) {
      // split along the top-left -> bottom-right diagonal
      m.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      m.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }

  m.planes.reserve(m.triangles.size());
  for (const auto& t : m.triangles) {
    auto pl = solve_plane(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    m.planes.push_back(pl.value());  // lattice triangles cannot be degenerate
  }

  m.regular = RegularGeometry{dense.origin_u, dense.origin_v, dense.step,
                              dense.gw, dense.gh};
  return m;
}

namespace {

inline double orient2d(double ax, double ay, double bx, double by, double px,
                       double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// > 0 iff p lies strictly inside the circumcircle of CCW triangle (a, b, c).
inline double in_circle(double ax, double ay, double bx, double by, double cx,
                        double cy, double px, double py) {
  const double adx = ax - px, ady = ay - py;
  const double bdx = bx - px, bdy = by - py;
  const double cdx = cx - px, cdy = cy - py;
  const double ad2 = adx * adx + ady * ady;
  const double bd2 = bdx * bdx + bdy * bdy;
  const double cd2 = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) +
         ad2 * (bdx * cdy - cdx * bdy);
}

struct BwTriangle {
  std::array<int, 3> v;    // CCW vertex indices
  std::array<int, 3> adj;  // neighbor across (v[k], v[k+1]), -1 on the border
  bool alive = true;
};

// Incremental Delaunay over points inside the frame rectangle. Seeding with
// the frame corners keeps every insertion interior (no hull growth, no
// synthetic far vertices) and every coordinate image-sized, so the
// integer-valued predicates stay exact.
class BowyerWatson {
 public:
  // pts: distinct in-frame positions; corners: indices into pts of the
  // top-left, top-right, bottom-left, bottom-right frame corners.
  BowyerWatson(const std::vector<MeshVertex>& pts,
               const std::array<int, 4>& corners)
      : pts_(pts) {
    tris_.push_back({{corners[0], corners[1], corners[3]}, {-1, -1, 1}, true});
    tris_.push_back({{corners[0], corners[3], corners[2]}, {0, -1, -1}, true});
  }

  void insert(int point_index) {
    const double px = pts_[point_index].u, py = pts_[point_index].v;
    const int start = locate(px, py);

    // Grow the cavity of triangles whose circumcircle strictly contains p.
    ++stamp_;
    mark_.resize(tris_.size(), 0);
    auto in_bad = [&](int ti) { return mark_[ti] == stamp_; };
    bad_.clear();
    stack_.assign(1, start);
    mark_[start] = stamp_;
    boundary_.clear();
    while (!stack_.empty()) {
      const int ti = stack_.back();
      stack_.pop_back();
      bad_.push_back(ti);
      const BwTriangle& t = tris_[ti];
      for (int k = 0; k < 3; ++k) {
        const int n = t.adj[k];
        if (n >= 0 && !in_bad(n)) {
          if (circle_contains(tris_[n], px, py)) {
            mark_[n] = stamp_;
            stack_.push_back(n);
            continue;
          }
        }
        if (n < 0 || !in_bad(n))
          boundary_.push_back({t.v[k], t.v[(k + 1) % 3], n});
      }
    }

    for (const int ti : bad_) tris_[ti].alive = false;

    // Retriangulate the cavity: one new triangle per boundary edge. A point
    // landing exactly on a border edge splits it instead: the collinear edge
    // emits nothing and the two fan ends become border edges themselves.
    by_a_.clear();
    by_b_.clear();
    const int first_new = static_cast<int>(tris_.size());
    for (const Edge& e : boundary_) {
      if (e.ext < 0 && orient2d(pts_[e.a].u, pts_[e.a].v, pts_[e.b].u,
                                pts_[e.b].v, px, py) == 0.0)
        continue;
      const int nt = static_cast<int>(tris_.size());
      tris_.push_back({{e.a, e.b, point_index}, {e.ext, -1, -1}, true});
      if (e.ext >= 0) relink(e.ext, e.b, e.a, nt);
      by_a_[e.a] = nt;
      by_b_[e.b] = nt;
    }
    for (int nt = first_new; nt < static_cast<int>(tris_.size()); ++nt) {
      BwTriangle& t = tris_[nt];
      t.adj[1] = lookup(by_a_, t.v[1]);  // across (b, p)
      t.adj[2] = lookup(by_b_, t.v[0]);  // across (p, a)
    }
    hint_ = first_new;
  }

  // Alive triangles.
  std::vector<std::array<int, 3>> extract() const {
    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris_)
      if (t.alive) out.push_back(t.v);
    return out;
  }

 private:
  struct Edge {
    int a, b, ext;
  };

  bool circle_contains(const BwTriangle& t, double px, double py) const {
    return in_circle(pts_[t.v[0]].u, pts_[t.v[0]].v, pts_[t.v[1]].u,
                     pts_[t.v[1]].v, pts_[t.v[2]].u, pts_[t.v[2]].v, px,
                     py) > 0.0;
  }

  bool contains(int ti, double px, double py) const {
    const BwTriangle& t = tris_[ti];
    for (int k = 0; k < 3; ++k) {
      if (orient2d(pts_[t.v[k]].u, pts_[t.v[k]].v, pts_[t.v[(k + 1) % 3]].u,
                   pts_[t.v[(k + 1) % 3]].v, px, py) < 0.0)
        return false;
    }
    return true;
  }

  int locate(double px, double py) const {
    int cur = hint_;
    const int cap = 4 * static_cast<int>(tris_.size()) + 16;
    for (int steps = 0; steps < cap; ++steps) {
      const BwTriangle& t = tris_[cur];
      int next = -2;
      for (int k = 0; k < 3; ++k) {
        if (orient2d(pts_[t.v[k]].u, pts_[t.v[k]].v, pts_[t.v[(k + 1) % 3]].u,
                     pts_[t.v[(k + 1) % 3]].v, px, py) < 0.0) {
          next = t.adj[k];
          break;
        }
      }
      if (next == -2) return cur;
      if (next < 0) break;  // stepped over the border: the point is off-frame
      cur = next;
    }
    // Walk cycled or left the frame (unreachable for in-frame points with
    // exact integer orientations); fall back to a linear scan.
    for (int ti = 0; ti < static_cast<int>(tris_.size()); ++ti)
      if (tris_[ti].alive && contains(ti, px, py)) return ti;
    throw std::runtime_error("triangulation point location failed");
  }

  static int lookup(const std::unordered_map<int, int>& m, int key) {
    const auto it = m.find(key);
    return it == m.end() ? -1 : it->second;
  }

  void relink(int tri, int va, int vb, int new_neighbor) {
    BwTriangle& t = tris_[tri];
    for (int k = 0; k < 3; ++k) {
      if (t.v[k] == va && t.v[(k + 1) % 3] == vb) {
        t.adj[k] = new_neighbor;
        return;
      }
    }
  }

  std::vector<MeshVertex> pts_;
  std::vector<BwTriangle> tris_;
  int hint_ = 0;
  int stamp_ = 0;
  std::vector<int> mark_;
  std::vector<int> bad_;
  std::vector<int> stack_;
  std::vector<Edge> boundary_;
  std::unordered_map<int, int> by_a_;
  std::unordered_map<int, int> by_b_;
};

void build_prior_raster(TriangleMesh& m, int width, int height) {
  m.raster_width = width;
  m.raster_height = height;
  m.tri_raster.assign(static_cast<std::size_t>(width) * height, -1);
  for (std::size_t ti = 0; ti < m.triangles.size(); ++ti) {
    const auto& t = m.triangles[ti];
    const MeshVertex& a = m.vertices[t[0]];
    const MeshVertex& b = m.vertices[t[1]];
    const MeshVertex& c = m.vertices[t[2]];
    const int x0 = std::max(0, static_cast<int>(
                                   std::ceil(std::min({a.u, b.u, c.u}))));
    const int x1 = std::min(width - 1, static_cast<int>(std::floor(
                                           std::max({a.u, b.u, c.u}))));
    const int y0 = std::max(0, static_cast<int>(
                                   std::ceil(std::min({a.v, b.v, c.v}))));
    const int y1 = std::min(height - 1, static_cast<int>(std::floor(
                                            std::max({a.v, b.v, c.v}))));
    for (int y = y0; y <= y1; ++y) {
      std::int32_t* row = m.tri_raster.data() + static_cast<std::size_t>(y) * width;
      for (int x = x0; x <= x1; ++x) {
        if (row[x] != -1) continue;  // edge ties keep the lower index
        if (orient2d(a.u, a.v, b.u, b.v, x, y) >= 0.0 &&
            orient2d(b.u, b.v, c.u, c.v, x, y) >= 0.0 &&
            orient2d(c.u, c.v, a.u, a.v, x, y) >= 0.0)
          row[x] = static_cast<std::int32_t>(ti);
      }
    }
  }
}

}  // namespace

std::optional<TriangleMesh> delaunay_triangulate(
    std::span<const SupportPoint> points, int width, int height) {
  if (points.empty() || width < 2 || height < 2) return std::nullopt;

  // Distinct positions, insertion order preserved.
  std::vector<MeshVertex> verts;
  verts.reserve(points.size() + 4);
  std::unordered_set<std::int64_t> seen;
  auto key = [](int u, int v) {
    return (static_cast<std::int64_t>(u) << 32) | static_cast<std::uint32_t>(v);
  };
  for (const auto& p : points) {
    if (seen.insert(key(p.u, p.v)).second)
      verts.push_back({static_cast<double>(p.u), static_cast<double>(p.v),
                       static_cast<double>(p.d)});
  }

  // Degenerate inputs signal the caller to fall back to a constant prior;
  // corner augmentation must not mask them.
  if (verts.size() < 3) return std::nullopt;
  bool collinear = true;
  for (std::size_t i = 2; i < verts.size() && collinear; ++i)
    collinear = orient2d(verts[0].u, verts[0].v, verts[1].u, verts[1].v,
                         verts[i].u, verts[i].v) == 0.0;
  if (collinear) return std::nullopt;

  // Corner vertices seed the triangulation and make it cover the frame; each
  // synthetic one takes the disparity of its nearest support (ties to the
  // earliest).
  const int corners[4][2] = {
      {0, 0}, {width - 1, 0}, {0, height - 1}, {width - 1, height - 1}};
  const std::size_t n_support = verts.size();
  std::array<int, 4> corner_idx{};
  for (int k = 0; k < 4; ++k) {
    const auto& c = corners[k];
    if (!seen.insert(key(c[0], c[1])).second) {
      for (std::size_t i = 0; i < n_support; ++i)
        if (verts[i].u == c[0] && verts[i].v == c[1]) {
          corner_idx[k] = static_cast<int>(i);
          break;
        }
      continue;
    }
    double best = 0.0;
    double best_dist = 0.0;
    for (std::size_t i = 0; i < n_support; ++i) {
      const double dx = verts[i].u - c[0], dy = verts[i].v - c[1];
      const double dist = dx * dx + dy * dy;
      if (i == 0 || dist < best_dist) {
        best_dist = dist;
        best = verts[i].d;
      }
    }
    corner_idx[k] = static_cast<int>(verts.size());
    verts.push_back({static_cast<double>(c[0]), static_cast<double>(c[1]), best});
  }

  BowyerWatson bw(verts, corner_idx);
  for (int i = 0; i < static_cast<int>(verts.size()); ++i) {
    if (i == corner_idx[0] || i == corner_idx[1] || i == corner_idx[2] ||
        i == corner_idx[3])
      continue;
    bw.insert(i);
  }

  TriangleMesh m;
  m.vertices = std::move(verts);
  m.triangles = bw.extract();
  if (m.triangles.empty()) return std::nullopt;

  m.planes.reserve(m.triangles.size());
  std::vector<std::array<int, 3>> kept;
  kept.reserve(m.triangles.size());
  for (const auto& t : m.triangles) {
    auto pl = solve_plane(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    if (!pl) continue;
    kept.push_back(t);
    m.planes.push_back(*pl);
  }
  m.triangles = std::move(kept);
  if (m.triangles.empty()) return std::nullopt;

  build_prior_raster(m, width, height);
  return m;
}

TriangleMesh constant_mesh(int width, int height, double d) {
  TriangleMesh m;
  const double w = width - 1, h = height - 1;
  m.vertices = {{0, 0, d}, {w, 0, d}, {w, h, d}, {0, h, d}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.planes = {{0, 0, d}, {0, 0, d}};
  build_prior_raster(m, width, height);
  return m;
}

std::optional<double> prior_disparity(const TriangleMesh& m, int u, int v,
                                      int d_max) {
  int tri = -1;
  if (m.regular) {
    const RegularGeometry& g = *m.regular;
    const int du = u - g.origin_u, dv = v - g.origin_v;
    if (du < 0 || dv < 0 || du > (g.gw - 1) * g.step ||
        dv > (g.gh - 1) * g.step)
      return std::nullopt;
    const int ci = std::min(du / g.step, g.gw - 2);
    const int cj = std::min(dv / g.step, g.gh - 2);
    const int lx = du - ci * g.step, ly = dv - cj * g.step;
    tri = 2 * (cj * (g.gw - 1) + ci) + (ly <= lx ? 0 : 1);
  } else {
    if (u < 0 || v < 0 || u >= m.raster_width || v >= m.raster_height)
      return std::nullopt;
    tri = m.tri_raster[static_cast<std::size_t>(v) * m.raster_width + u];
    if (tri < 0) return std::nullopt;
  }
  const double d = m.planes[tri].eval(u, v);
  return std::clamp(d, 0.0, static_cast<double>(d_max));
}

void write_off(const TriangleMesh& m, std::ostream& out) {
  out << "OFF\n" << m.vertices.size() << " " << m.triangles.size() << " 0\n";
  for (const auto& v : m.vertices) out << v.u << " " << v.v << " " << v.d << "\n";
  for (const auto& t : m.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

}  // namespace stereopipe
