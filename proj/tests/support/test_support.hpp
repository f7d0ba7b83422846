#pragma once

#include "ibckit/common.hpp"
#include "ibckit/polytope.hpp"
#include "ibckit/system.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace ibckit::test {

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Mat m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

inline LinearSystem double_integrator() {
  return LinearSystem(mat({{0, 1}, {0, 0}}), mat({{0}, {1}}));
}

inline std::vector<Vec> hexagon_points() {
  return {vec({0.8, 1}), vec({-0.8, 1}), vec({0.8, -1}), vec({-0.8, -1}), vec({1, 0}), vec({-1, 0})};
}

inline Polytope hexagon() { return hull_from_points(hexagon_points()); }

inline Polytope box_p() { return make_box(vec({-0.8, -1}), vec({0.8, 1})); }

inline Polytope arm_region(double vel) {
  const double q = 5.0 * std::numbers::pi / 12.0;
  const double e = std::numbers::pi / 2.0;
  return hull_from_points(std::vector<Vec>{vec({q, vel}), vec({-q, vel}), vec({q, -vel}),
                                           vec({-q, -vel}), vec({e, 0}), vec({-e, 0})});
}

inline bool has_point(const std::vector<Vec>& pts, const Vec& p, double tol = 1e-9) {
  for (const auto& q : pts)
    if ((q - p).cwiseAbs().maxCoeff() <= tol) return true;
  return false;
}

/// Seeded generator shared by property tests.
inline std::mt19937_64& rng(std::uint64_t seed = 0) {
  static std::mt19937_64 gen(seed);
  return gen;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

/// Rejection sample of a point inside `x` from its bounding box.
inline Vec sample_inside(std::mt19937_64& g, const Polytope& x, double shrink = 1.0) {
  Vec lo = x.vertices().front();
  Vec hi = lo;
  for (const auto& v : x.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  for (;;) {
    Vec p(x.dim());
    for (int i = 0; i < x.dim(); ++i) p[i] = uniform(g, lo[i], hi[i]);
    if (max_violation(x, p / shrink) < 0.0) return p;
  }
}

}  // namespace ibckit::test
