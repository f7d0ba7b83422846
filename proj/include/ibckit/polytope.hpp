#pragma once

#include "ibckit/common.hpp"

#include <span>
#include <vector>

namespace ibckit {

/// Half-space {x : normal . x <= offset} with a unit-length outward normal.
struct Halfspace {
  Vec normal;
  double offset = 0.0;
};

/// Full-dimensional convex polytope in R^n (1 <= n <= 4) held in both
/// vertex and half-space form. Immutable once built.
class Polytope {
 public:
  Polytope() = default;

  int dim() const { return dim_; }
  const std::vector<Vec>& vertices() const { return vertices_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }

  /// Indices into vertices() of the vertices lying on each facet, parallel to halfspaces().
  const std::vector<std::vector<int>>& facet_vertices() const { return facet_vertices_; }

  /// Geometric tolerance used for incidence, scaled to the data extent.
  double tolerance() const { return tol_; }

  /// Rows n_i of the normalized form {x : n_i . x <= 1}. Requires 0 in the interior.
  const std::vector<Vec>& normalized_normals() const;

  /// Index of the vertex equal to `v` within tolerance, or -1.
  int find_vertex(const Vec& v) const;

  friend struct PolytopeAccess;

 private:
  int dim_ = 0;
  double tol_ = kTolGeo;
  std::vector<Vec> vertices_;
  std::vector<Halfspace> halfspaces_;
  std::vector<std::vector<int>> facet_vertices_;
  std::vector<Vec> normalized_;  // empty unless 0 is interior
};

enum class Location { kInterior, kBoundary, kOutside };

const char* to_string(Location loc);

struct TangentCone {
  Vec vertex;
  std::vector<Vec> normals;   // unit outward normals h_j, j in J(v)
  std::vector<int> facets;    // indices into Polytope::halfspaces()
};

struct Triangulation {
  std::vector<Vec> points;
  std::vector<std::vector<int>> simplices;  // each n+1 indices into points
};

/// Convex hull with irredundant vertex and facet lists. Throws DegenerateInput
/// when the affine hull of `points` is lower dimensional.
Polytope hull_from_points(std::span<const Vec> points);
inline Polytope hull_from_points(const std::vector<Vec>& points) {
  return hull_from_points(std::span<const Vec>(points));
}

/// Polytope from half-spaces {x : normal . x <= offset} (normals need not be unit).
Polytope from_halfspaces(std::span<const Halfspace> halfspaces);

/// Axis-aligned box [lo, hi].
Polytope make_box(const Vec& lo, const Vec& hi);

Location contains(const Polytope& x, const Vec& point, double tol = kTolGeo);

/// Largest signed violation max_i (h_i . x - c_i).
double max_violation(const Polytope& x, const Vec& point);

TangentCone tangent_cone(const Polytope& x, const Vec& vertex);

bool is_simplicial(const Polytope& x);

/// Triangulation whose simplices all have the origin as a vertex; each facet is
/// fanned from its lexicographically smallest vertex. The origin is the last point.
Triangulation triangulate_with_origin(const Polytope& x);

Polytope scale(const Polytope& x, double lambda);

Polytope translate(const Polytope& x, const Vec& offset);

/// Largest lambda with lambda * x inside `outer`.
double max_inscribed_scale(const Polytope& x, const Polytope& outer);

/// Volume of an n-simplex given its n+1 vertices.
double simplex_volume(std::span<const Vec> vertices);

/// Indices (into `points`) of each facet of the hull of `points`, a point set
/// spanning R^k. Used recursively for facet triangulation.
std::vector<std::vector<int>> facet_index_sets(std::span<const Vec> points, double tol);

}  // namespace ibckit
