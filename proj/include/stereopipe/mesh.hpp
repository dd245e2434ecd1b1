#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "stereopipe/support.hpp"

namespace stereopipe {

struct MeshVertex {
  double u = 0.0;
  double v = 0.0;
  double d = 0.0;
};

// d(u, v) = a*u + b*v + c
struct PlaneCoeffs {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double eval(double u, double v) const { return a * u + b * v + c; }
};

// Present on regular meshes: lets prior queries locate the containing
// triangle by cell arithmetic.
struct RegularGeometry {
  int origin_u = 0;
  int origin_v = 0;
  int step = 1;
  int gw = 0;
  int gh = 0;
};

struct TriangleMesh {
  std::vector<MeshVertex> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<PlaneCoeffs> planes;

  std::optional<RegularGeometry> regular;

  // Delaunay meshes carry a per-pixel containing-triangle raster
  // (-1 outside coverage); pixels on shared edges go to the lower index.
  int raster_width = 0;
  int raster_height = 0;
  std::vector<std::int32_t> tri_raster;
};

// Exact plane through three vertices (Cramer). Degenerate triangles yield
// no value.
std::optional<PlaneCoeffs> solve_plane(const MeshVertex& p1,
                                       const MeshVertex& p2,
                                       const MeshVertex& p3);

// Splits every unit lattice square of a dense grid along its
// top-left -> bottom-right diagonal: 2*(gw-1)*(gh-1) triangles.
// Throws std::invalid_argument on grids smaller than 2x2 or with Empty cells.
TriangleMesh regular_triangulate(const SupportGrid& dense);

// Bowyer-Watson Delaunay over the support points plus 4 synthetic image
// corners (each taking the disparity of its nearest support). Duplicate
// positions beyond the first are ignored. Returns nullopt for fewer than 3
// distinct points or an all-collinear set.
std::optional<TriangleMesh> delaunay_triangulate(
    std::span<const SupportPoint> points, int width, int height);

// Two full-frame triangles at a flat disparity d: the prior every pixel sees
// when triangulation is impossible.
TriangleMesh constant_mesh(int width, int height, double d);

// Plane prior at a pixel, clamped to [0, d_max]; nullopt outside coverage.
std::optional<double> prior_disparity(const TriangleMesh& m, int u, int v,
                                      int d_max);

// OFF-format dump for debugging.
void write_off(const TriangleMesh& m, std::ostream& out);

}  // namespace stereopipe
