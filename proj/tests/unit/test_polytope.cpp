#include "doctest.h"
#include "test_support.hpp"

#include "ibckit/polytope.hpp"

#include <algorithm>
#include <cmath>

using namespace ibckit;
using namespace ibckit::test;

namespace {

// Independent oracle: shoelace area of a counter-clockwise polygon.
double shoelace(const std::vector<Vec>& ccw) {
  double a = 0.0;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Vec& p = ccw[i];
    const Vec& q = ccw[(i + 1) % ccw.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

double total_volume(const Triangulation& t) {
  double v = 0.0;
  for (const auto& s : t.simplices) {
    std::vector<Vec> pts;
    for (int i : s) pts.push_back(t.points[i]);
    v += simplex_volume(pts);
  }
  return v;
}

Polytope cube() { return make_box(Vec::Constant(3, -1.0), Vec::Constant(3, 1.0)); }

Polytope octahedron() {
  std::vector<Vec> pts;
  for (int i = 0; i < 3; ++i)
    for (double s : {-1.0, 1.0}) pts.push_back(s * Vec::Unit(3, i));
  return hull_from_points(pts);
}

}  // namespace

TEST_CASE("hexagon hull keeps all six inputs and has six unit-offset facets") {
  const Polytope x = hexagon();
  CHECK(x.vertices().size() == 6);
  CHECK(x.halfspaces().size() == 6);
  for (const auto& p : hexagon_points()) CHECK(has_point(x.vertices(), p));

  const std::vector<Vec> expected = {vec({0, 1}), vec({0, -1}), vec({1, 0.2}),
                                     vec({1, -0.2}), vec({-1, 0.2}), vec({-1, -0.2})};
  for (const auto& n : x.normalized_normals()) CHECK(has_point(expected, n, 1e-12));

  // Each facet line passes through exactly its two endpoints; others strictly inside.
  for (std::size_t f = 0; f < x.halfspaces().size(); ++f) {
    const Vec& n = x.normalized_normals()[f];
    int on = 0;
    for (const auto& v : x.vertices()) {
      const double s = n.dot(v);
      if (std::abs(s - 1.0) < 1e-12) ++on;
      else CHECK(s < 1.0);
    }
    CHECK(on == 2);
  }
}

TEST_CASE("2-D vertices are counter-clockwise from the lexicographic minimum") {
  const Polytope x = hexagon();
  CHECK(x.vertices().front().isApprox(vec({-1, 0})));
  CHECK(shoelace(x.vertices()) == doctest::Approx(3.6));
}

TEST_CASE("interior points are pruned") {
  const std::vector<Vec> pts = {vec({0, 0}), vec({1, 0}), vec({0, 1}), vec({1, 1}), vec({0.5, 0.5})};
  const Polytope sq = hull_from_points(pts);
  CHECK(sq.vertices().size() == 4);
  CHECK_FALSE(has_point(sq.vertices(), vec({0.5, 0.5})));
}

TEST_CASE("collinear or coincident points are rejected") {
  const std::vector<Vec> line = {vec({0, 0}), vec({1, 1}), vec({2, 2})};
  CHECK_THROWS_AS(hull_from_points(line), Error);
  try {
    hull_from_points(line);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateInput);
  }
}

TEST_CASE("membership classification") {
  const Polytope x = hexagon();
  CHECK(contains(x, vec({0, 0})) == Location::kInterior);
  CHECK(contains(x, vec({1, 0})) == Location::kBoundary);
  CHECK(contains(x, vec({1.01, 0})) == Location::kOutside);
}

TEST_CASE("tangent cones") {
  const Polytope x = hexagon();
  const TangentCone c = tangent_cone(x, vec({1, 0}));
  REQUIRE(c.normals.size() == 2);
  const Vec a = vec({1, 0.2}).normalized();
  const Vec b = vec({1, -0.2}).normalized();
  for (const auto& n : c.normals) {
    CHECK(n.norm() == doctest::Approx(1.0));
    CHECK((n.isApprox(a) || n.isApprox(b)));
  }
  const TangentCone top = tangent_cone(x, vec({0.8, 1}));
  REQUIRE(top.normals.size() == 2);
  CHECK(has_point(top.normals, vec({0, 1})));
  CHECK(has_point(top.normals, a));

  const Polytope sq = make_box(vec({-1, -1}), vec({1, 1}));
  const TangentCone corner = tangent_cone(sq, vec({1, 1}));
  CHECK(corner.normals.size() == 2);
  CHECK(has_point(corner.normals, vec({1, 0})));
  CHECK(has_point(corner.normals, vec({0, 1})));

  CHECK_THROWS_AS(tangent_cone(x, vec({0.9, 0.5})), Error);
}

TEST_CASE("cone soundness on sampled inward directions") {
  auto& g = rng();
  for (const Polytope& x : {hexagon(), octahedron(), cube()}) {
    for (const auto& v : x.vertices()) {
      const TangentCone c = tangent_cone(x, v);
      for (int k = 0; k < 200; ++k) {
        Vec y(x.dim());
        for (int i = 0; i < x.dim(); ++i) y[i] = uniform(g, -1, 1);
        if (contains(x, v + 1e-4 * y) != Location::kInterior) continue;
        for (const auto& h : c.normals) CHECK(h.dot(y) <= 1e-12);
      }
    }
  }
}

TEST_CASE("simpliciality") {
  CHECK(is_simplicial(hexagon()));
  CHECK_FALSE(is_simplicial(cube()));
  CHECK(is_simplicial(octahedron()));
}

TEST_CASE("origin fan triangulation") {
  const Triangulation hex = triangulate_with_origin(hexagon());
  CHECK(hex.simplices.size() == 6);
  CHECK(total_volume(hex) == doctest::Approx(3.6).epsilon(1e-12));

  const Triangulation c = triangulate_with_origin(cube());
  CHECK(c.simplices.size() == 12);
  CHECK(total_volume(c) == doctest::Approx(8.0).epsilon(1e-12));

  const std::vector<Vec> tri_pts = {vec({1, 0}), vec({-0.5, 0.8}), vec({-0.5, -0.8})};
  const Triangulation t = triangulate_with_origin(hull_from_points(tri_pts));
  CHECK(t.simplices.size() == 3);

  for (const Triangulation* tr : {&hex, &c, &t}) {
    const int origin = static_cast<int>(tr->points.size()) - 1;
    CHECK(tr->points.back().norm() == 0.0);
    for (const auto& s : tr->simplices) {
      CHECK(s.front() == origin);
      std::vector<Vec> pts;
      for (int i : s) pts.push_back(tr->points[i]);
      CHECK(simplex_volume(pts) > 1e-9);
    }
  }

  const Polytope shifted = make_box(vec({0, 0}), vec({1, 1}));
  CHECK_THROWS_AS(triangulate_with_origin(shifted), Error);
}

TEST_CASE("cube facets fan from their lexicographically smallest vertex") {
  const Triangulation c = triangulate_with_origin(cube());
  // Every simplex (origin excluded) has a vertex that is lexicographically minimal
  // among the vertices of its facet; both triangles of a facet share it.
  for (std::size_t f = 0; f + 1 < c.simplices.size(); f += 2) {
    const auto& s0 = c.simplices[f];
    const auto& s1 = c.simplices[f + 1];
    std::vector<int> shared;
    for (int i = 1; i < 4; ++i)
      if (std::find(s1.begin() + 1, s1.end(), s0[i]) != s1.end()) shared.push_back(s0[i]);
    CHECK(shared.size() == 2);
  }
}

TEST_CASE("scaling") {
  const Polytope x = hexagon();
  const Polytope half = scale(x, 0.5);
  for (const auto& p : {vec({0.4, 0.5}), vec({-0.4, 0.5}), vec({0.4, -0.5}), vec({-0.4, -0.5}),
                        vec({0.5, 0}), vec({-0.5, 0})})
    CHECK(has_point(half.vertices(), p));
  for (double lambda : {0.1, 0.5, 2.0, 10.0}) {
    const Polytope back = scale(scale(x, lambda), 1.0 / lambda);
    for (const auto& v : x.vertices()) CHECK(has_point(back.vertices(), v, 1e-9));
  }
  CHECK(scale(x, 1.0).vertices() == x.vertices());
}

TEST_CASE("round trip through the hull") {
  for (const Polytope& x : {hexagon(), octahedron(), cube()}) {
    const Polytope y = hull_from_points(x.vertices());
    CHECK(y.vertices().size() == x.vertices().size());
    for (const auto& v : x.vertices()) CHECK(has_point(y.vertices(), v));
  }
}

TEST_CASE("half-space input reconstructs vertices") {
  const std::vector<Halfspace> hs = {{vec({1, 0}), 1}, {vec({-1, 0}), 1}, {vec({0, 2}), 2},
                                     {vec({0, -1}), 1}, {vec({1, 1}), 10}};
  const Polytope sq = from_halfspaces(hs);
  CHECK(sq.vertices().size() == 4);
  CHECK(sq.halfspaces().size() == 4);
  CHECK(has_point(sq.vertices(), vec({1, 1})));
}

TEST_CASE("maximal inscribed scale") {
  const Polytope x = hexagon();
  CHECK(max_inscribed_scale(x, x) == doctest::Approx(1.0));
  CHECK(max_inscribed_scale(x, make_box(vec({-0.5, -0.5}), vec({0.5, 0.5}))) ==
        doctest::Approx(0.5));
  CHECK(max_inscribed_scale(x, make_box(vec({-1, -1}), vec({1, 1}))) == doctest::Approx(1.0));
}

TEST_CASE("random 3-D and 4-D hulls contain every input point") {
  auto& g = rng();
  for (int dim : {3, 4}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Vec> pts;
      for (int k = 0; k < 12; ++k) {
        Vec p(dim);
        for (int i = 0; i < dim; ++i) p[i] = uniform(g, -1, 1);
        pts.push_back(p);
      }
      const Polytope x = hull_from_points(pts);
      for (const auto& p : pts) CHECK(contains(x, p) != Location::kOutside);
      for (const auto& v : x.vertices()) CHECK(contains(x, v) == Location::kBoundary);
      // Each vertex is extreme: not inside the hull of the others.
      for (std::size_t i = 0; i < x.vertices().size(); ++i) {
        std::vector<Vec> rest;
        for (std::size_t j = 0; j < x.vertices().size(); ++j)
          if (j != i) rest.push_back(x.vertices()[j]);
        CHECK(contains(hull_from_points(rest), x.vertices()[i]) == Location::kOutside);
      }
    }
  }
}
