#include "ibckit/polytope.hpp"

#include "ibckit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ibckit {

const char* to_string(Location loc) {
  switch (loc) {
    case Location::kInterior: return "Interior";
    case Location::kBoundary: return "Boundary";
    case Location::kOutside: return "Outside";
  }
  return "?";
}

struct PolytopeAccess {
  static Polytope assemble(int dim, double tol, std::vector<Vec> vertices,
                           std::vector<Halfspace> halfspaces,
                           std::vector<std::vector<int>> facet_vertices) {
    Polytope p;
    p.dim_ = dim;
    p.tol_ = tol;
    p.vertices_ = std::move(vertices);
    p.halfspaces_ = std::move(halfspaces);
    p.facet_vertices_ = std::move(facet_vertices);
    const bool origin_interior =
        std::all_of(p.halfspaces_.begin(), p.halfspaces_.end(),
                    [&](const Halfspace& h) { return h.offset > tol; });
    if (origin_interior) {
      p.normalized_.reserve(p.halfspaces_.size());
      for (const auto& h : p.halfspaces_) p.normalized_.push_back(h.normal / h.offset);
    }
    return p;
  }
};

namespace {

struct Facet {
  Halfspace hs;
  std::vector<int> incident;
};

double data_tolerance(std::span<const Vec> points) {
  double extent = 1.0;
  for (const auto& p : points) extent = std::max(extent, p.cwiseAbs().maxCoeff());
  return kTolGeo * extent;
}

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

// Calls fn(indices) for every k-subset of {0..n-1} in lexicographic order.
template <typename Fn>
void for_each_combination(int n, int k, Fn&& fn) {
  if (k > n || k <= 0) return;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::vector<Vec> unique_points(std::span<const Vec> points, double tol) {
  std::vector<Vec> out;
  for (const auto& p : points) {
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Vec& q) {
      return (p - q).cwiseAbs().maxCoeff() <= tol;
    });
    if (!dup) out.push_back(p);
  }
  return out;
}

int affine_rank(std::span<const Vec> points) {
  if (points.size() < 2) return 0;
  Mat d(points[0].size(), static_cast<Eigen::Index>(points.size() - 1));
  for (std::size_t i = 1; i < points.size(); ++i) d.col(i - 1) = points[i] - points[0];
  return linalg::rank(d, 1e-10);
}

// Supporting hyperplanes of a point set spanning R^k, found by testing the
// hyperplane through every affinely independent k-subset.
std::vector<Facet> enumerate_facets(std::span<const Vec> points, double tol) {
  const int npts = static_cast<int>(points.size());
  const int k = static_cast<int>(points[0].size());
  std::vector<Facet> facets;
  for_each_combination(npts, k, [&](const std::vector<int>& subset) {
    Vec h;
    if (k == 1) {
      h = Vec::Ones(1);
    } else {
      Mat d(k - 1, k);
      for (int i = 1; i < k; ++i) d.row(i - 1) = (points[subset[i]] - points[subset[0]]).transpose();
      const Mat ns = linalg::null_basis(d, 1e-10);
      if (ns.cols() != 1) return;
      h = ns.col(0).normalized();
    }
    double c = h.dot(points[subset[0]]);
    double smax = -std::numeric_limits<double>::infinity();
    double smin = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
      const double s = h.dot(p) - c;
      smax = std::max(smax, s);
      smin = std::min(smin, s);
    }
    if (smax > tol) {
      if (smin < -tol) return;
      h = -h;
      c = -c;
    }
    for (const auto& f : facets)
      if ((f.hs.normal - h).cwiseAbs().maxCoeff() <= 1e-7 && std::abs(f.hs.offset - c) <= tol) return;
    Facet f{{h, c}, {}};
    for (int i = 0; i < npts; ++i)
      if (std::abs(h.dot(points[i]) - c) <= tol) f.incident.push_back(i);
    facets.push_back(std::move(f));
  });
  return facets;
}

}  // namespace

std::vector<std::vector<int>> facet_index_sets(std::span<const Vec> points, double tol) {
  std::vector<std::vector<int>> out;
  for (auto& f : enumerate_facets(points, tol)) out.push_back(std::move(f.incident));
  return out;
}

Polytope hull_from_points(std::span<const Vec> points) {
  if (points.empty()) throw Error(ErrorCode::kDegenerateInput, "empty point set");
  const int n = static_cast<int>(points[0].size());
  if (n < 1 || n > 4) throw Error(ErrorCode::kDegenerateInput, "dimension must be 1..4");
  for (const auto& p : points)
    if (p.size() != n) throw Error(ErrorCode::kDegenerateInput, "mixed point dimensions");

  const double tol = data_tolerance(points);
  std::vector<Vec> pts = unique_points(points, tol);
  if (affine_rank(pts) < n)
    throw Error(ErrorCode::kDegenerateInput, "affine hull of the points has dimension < " +
                                                 std::to_string(n));

  std::vector<Facet> facets = enumerate_facets(pts, tol);

  // Extreme points: incident facet normals span R^n.
  std::vector<int> keep;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    std::vector<Vec> normals;
    for (const auto& f : facets)
      if (std::find(f.incident.begin(), f.incident.end(), i) != f.incident.end())
        normals.push_back(f.hs.normal);
    if (static_cast<int>(normals.size()) < n) continue;
    Mat m(n, static_cast<Eigen::Index>(normals.size()));
    for (std::size_t j = 0; j < normals.size(); ++j) m.col(j) = normals[j];
    if (linalg::rank(m, 1e-9) == n) keep.push_back(i);
  }

  std::vector<Vec> vertices;
  for (int i : keep) vertices.push_back(pts[i]);

  if (n == 2) {
    // Counter-clockwise order starting from the lexicographically smallest vertex.
    Vec centroid = Vec::Zero(2);
    for (const auto& v : vertices) centroid += v;
    centroid /= static_cast<double>(vertices.size());
    std::sort(vertices.begin(), vertices.end(), [&](const Vec& a, const Vec& b) {
      return std::atan2(a[1] - centroid[1], a[0] - centroid[0]) <
             std::atan2(b[1] - centroid[1], b[0] - centroid[0]);
    });
    auto first = std::min_element(vertices.begin(), vertices.end(), lex_less);
    std::rotate(vertices.begin(), first, vertices.end());
  } else {
    std::sort(vertices.begin(), vertices.end(), lex_less);
  }

  std::vector<Halfspace> halfspaces;
  std::vector<std::vector<int>> facet_vertices;
  for (const auto& f : facets) {
    std::vector<int> inc;
    for (int i = 0; i < static_cast<int>(vertices.size()); ++i)
      if (std::abs(f.hs.normal.dot(vertices[i]) - f.hs.offset) <= tol) inc.push_back(i);
    halfspaces.push_back(f.hs);
    facet_vertices.push_back(std::move(inc));
  }

  if (n == 2) {
    // Edge j joins vertex j and j+1.
    const int nv = static_cast<int>(vertices.size());
    std::vector<std::size_t> order(halfspaces.size());
    std::iota(order.begin(), order.end(), 0);
    auto edge_key = [&](std::size_t f) {
      const auto& inc = facet_vertices[f];
      const int a = inc[0];
      const int b = inc[1];
      return (b - a == 1) ? a : (a == 0 && b == nv - 1 ? nv - 1 : std::min(a, b));
    };
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return edge_key(a) < edge_key(b); });
    std::vector<Halfspace> hs2;
    std::vector<std::vector<int>> fv2;
    for (auto f : order) {
      hs2.push_back(halfspaces[f]);
      fv2.push_back(facet_vertices[f]);
    }
    halfspaces = std::move(hs2);
    facet_vertices = std::move(fv2);
  }

  return PolytopeAccess::assemble(n, tol, std::move(vertices), std::move(halfspaces),
                                  std::move(facet_vertices));
}

Polytope from_halfspaces(std::span<const Halfspace> halfspaces) {
  if (halfspaces.empty()) throw Error(ErrorCode::kDegenerateInput, "no half-spaces");
  const int n = static_cast<int>(halfspaces[0].normal.size());
  std::vector<Halfspace> unit;
  for (const auto& h : halfspaces) {
    const double norm = h.normal.norm();
    if (h.normal.size() != n || norm == 0.0)
      throw Error(ErrorCode::kDegenerateInput, "invalid half-space normal");
    unit.push_back({h.normal / norm, h.offset / norm});
  }
  double extent = 1.0;
  for (const auto& h : unit) extent = std::max(extent, std::abs(h.offset));
  const double tol = kTolGeo * extent;

  std::vector<Vec> candidates;
  for_each_combination(static_cast<int>(unit.size()), n, [&](const std::vector<int>& subset) {
    Mat a(n, n);
    Vec b(n);
    for (int i = 0; i < n; ++i) {
      a.row(i) = unit[subset[i]].normal.transpose();
      b[i] = unit[subset[i]].offset;
    }
    Eigen::FullPivLU<Mat> lu(a);
    if (lu.rank() < n) return;
    const Vec x = lu.solve(b);
    for (const auto& h : unit)
      if (h.normal.dot(x) - h.offset > tol * std::max(1.0, x.cwiseAbs().maxCoeff())) return;
    candidates.push_back(x);
  });
  if (static_cast<int>(candidates.size()) < n + 1)
    throw Error(ErrorCode::kDegenerateInput, "half-spaces do not bound a full-dimensional polytope");
  return hull_from_points(candidates);
}

Polytope make_box(const Vec& lo, const Vec& hi) {
  const auto n = lo.size();
  if (hi.size() != n) throw Error(ErrorCode::kInvalidArgument, "box bound sizes differ");
  std::vector<Vec> corners;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Vec c(n);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = (mask >> i) & 1 ? hi[i] : lo[i];
    corners.push_back(c);
  }
  return hull_from_points(corners);
}

const std::vector<Vec>& Polytope::normalized_normals() const {
  if (normalized_.empty())
    throw Error(ErrorCode::kOriginNotInterior, "normalized form needs 0 in the interior");
  return normalized_;
}

int Polytope::find_vertex(const Vec& v) const {
  for (int i = 0; i < static_cast<int>(vertices_.size()); ++i)
    if ((vertices_[i] - v).cwiseAbs().maxCoeff() <= tol_ * 10) return i;
  return -1;
}

double max_violation(const Polytope& x, const Vec& point) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& h : x.halfspaces()) worst = std::max(worst, h.normal.dot(point) - h.offset);
  return worst;
}

Location contains(const Polytope& x, const Vec& point, double tol) {
  const double v = max_violation(x, point);
  if (v > tol) return Location::kOutside;
  if (v >= -tol) return Location::kBoundary;
  return Location::kInterior;
}

TangentCone tangent_cone(const Polytope& x, const Vec& vertex) {
  const int idx = x.find_vertex(vertex);
  if (idx < 0) throw Error(ErrorCode::kNotAVertex, format_vec(vertex));
  TangentCone cone{x.vertices()[idx], {}, {}};
  const auto& fv = x.facet_vertices();
  for (int j = 0; j < static_cast<int>(fv.size()); ++j) {
    if (std::find(fv[j].begin(), fv[j].end(), idx) != fv[j].end()) {
      cone.facets.push_back(j);
      cone.normals.push_back(x.halfspaces()[j].normal);
    }
  }
  return cone;
}

bool is_simplicial(const Polytope& x) {
  return std::all_of(x.facet_vertices().begin(), x.facet_vertices().end(),
                     [&](const std::vector<int>& f) { return static_cast<int>(f.size()) == x.dim(); });
}

namespace {

// Pulling triangulation of a k-dimensional face given by point indices.
void triangulate_face(const std::vector<Vec>& points, const std::vector<int>& face, int k,
                      double tol, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(face.size()) == k + 1) {
    out.push_back(face);
    return;
  }
  int apex_pos = 0;
  for (int i = 1; i < static_cast<int>(face.size()); ++i)
    if (lex_less(points[face[i]], points[face[apex_pos]])) apex_pos = i;

  const Vec& base = points[face[0]];
  Mat diffs(base.size(), static_cast<Eigen::Index>(face.size() - 1));
  for (std::size_t i = 1; i < face.size(); ++i) diffs.col(i - 1) = points[face[i]] - base;
  const Mat q = linalg::range_basis(diffs, 1e-10);
  if (q.cols() != k) throw Error(ErrorCode::kDegenerateInput, "face is not full dimensional");

  std::vector<Vec> local;
  local.reserve(face.size());
  for (int id : face) local.push_back(q.transpose() * (points[id] - base));

  for (const auto& sub : facet_index_sets(local, tol)) {
    if (std::find(sub.begin(), sub.end(), apex_pos) != sub.end()) continue;
    std::vector<int> subface;
    for (int s : sub) subface.push_back(face[s]);
    std::vector<std::vector<int>> parts;
    triangulate_face(points, subface, k - 1, tol, parts);
    for (auto& p : parts) {
      p.insert(p.begin(), face[apex_pos]);
      out.push_back(std::move(p));
    }
  }
}

}  // namespace

Triangulation triangulate_with_origin(const Polytope& x) {
  for (const auto& h : x.halfspaces())
    if (h.offset <= x.tolerance())
      throw Error(ErrorCode::kOriginNotInterior, "origin must lie in the interior");
  Triangulation tri;
  tri.points = x.vertices();
  const int origin = static_cast<int>(tri.points.size());
  tri.points.push_back(Vec::Zero(x.dim()));
  for (const auto& facet : x.facet_vertices()) {
    std::vector<std::vector<int>> parts;
    triangulate_face(tri.points, facet, x.dim() - 1, x.tolerance(), parts);
    for (auto& p : parts) {
      p.insert(p.begin(), origin);
      tri.simplices.push_back(std::move(p));
    }
  }
  return tri;
}

Polytope scale(const Polytope& x, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::kInvalidArgument, "scale factor must be positive");
  std::vector<Vec> v = x.vertices();
  for (auto& p : v) p *= lambda;
  std::vector<Halfspace> h = x.halfspaces();
  for (auto& hs : h) hs.offset *= lambda;
  return PolytopeAccess::assemble(x.dim(), x.tolerance() * std::max(1.0, lambda), std::move(v),
                                  std::move(h), x.facet_vertices());
}

Polytope translate(const Polytope& x, const Vec& offset) {
  std::vector<Vec> v = x.vertices();
  for (auto& p : v) p += offset;
  std::vector<Halfspace> h = x.halfspaces();
  for (auto& hs : h) hs.offset += hs.normal.dot(offset);
  const double tol = std::max(x.tolerance(), kTolGeo * offset.cwiseAbs().maxCoeff());
  return PolytopeAccess::assemble(x.dim(), tol, std::move(v), std::move(h), x.facet_vertices());
}

double max_inscribed_scale(const Polytope& x, const Polytope& outer) {
  const auto& normals = outer.normalized_normals();
  double worst = 0.0;
  for (const auto& v : x.vertices())
    for (const auto& n : normals) worst = std::max(worst, n.dot(v));
  if (worst <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / worst;
}

double simplex_volume(std::span<const Vec> vertices) {
  const auto n = vertices[0].size();
  Mat m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m.col(i) = vertices[i + 1] - vertices[0];
  double fact = 1.0;
  for (Eigen::Index i = 2; i <= n; ++i) fact *= static_cast<double>(i);
  return std::abs(m.determinant()) / fact;
}

}  // namespace ibckit
