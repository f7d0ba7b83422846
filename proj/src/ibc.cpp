#include "ibckit/ibc.hpp"

#include "ibckit/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ibckit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Variables [u (m); eps]. Rows: sign * h_j^T B u + eps <= -sign * h_j . A v, then U rows.
VertexLp margin_lp(const LinearSystem& sys, const Polytope& x, const Vec& vertex,
                   const InputSet& inputs, Strictness strictness, double sign) {
  const TangentCone cone = tangent_cone(x, vertex);
  const int m = sys.m();
  const Vec av = sys.a() * vertex;
  const int nu = inputs.bounded() ? static_cast<int>(inputs.bounds().halfspaces().size()) : 0;
  const int rows = static_cast<int>(cone.normals.size()) + nu;

  lp::Problem p;
  p.objective = Vec::Zero(m + 1);
  p.objective[m] = 1.0;
  p.a = Mat::Zero(rows, m + 1);
  p.b = Vec::Zero(rows);
  int r = 0;
  for (const Vec& h : cone.normals) {
    p.a.row(r).head(m) = sign * (h.transpose() * sys.b());
    p.a(r, m) = 1.0;
    p.b[r] = -sign * h.dot(av);
    ++r;
  }
  if (inputs.bounded()) {
    for (const Halfspace& hs : inputs.bounds().halfspaces()) {
      p.a.row(r).head(m) = hs.normal.transpose();
      p.b[r] = hs.offset;
      ++r;
    }
  }
  p.lower = Vec::Constant(m + 1, -kInf);
  p.upper = Vec::Constant(m + 1, kInf);
  p.upper[m] = kMarginCap;

  const lp::Result res = lp::solve(p);
  if (res.status != lp::Status::kOptimal)
    throw Error(ErrorCode::kLpFailure,
                std::string("vertex LP ") + lp::to_string(res.status) + " at " + format_vec(vertex));
  VertexLp out;
  out.margin = res.x[m];
  out.witness = res.x.head(m);
  out.feasible = strictness == Strictness::kStrict ? out.margin > kTolLp : out.margin >= -kTolLp;
  return out;
}

Vec equilibrium_input(const LinearSystem& sys, const Vec& v) {
  return sys.b().colPivHouseholderQr().solve(-(sys.a() * v));
}

}  // namespace

InputSet::InputSet(Polytope bounds) : bounds_(std::move(bounds)) {
  if (ibckit::contains(*bounds_, Vec::Zero(bounds_->dim())) != Location::kInterior)
    throw Error(ErrorCode::kOriginNotInterior, "input set must contain 0 in its interior");
}

InputSet InputSet::box(const Vec& lo, const Vec& hi) { return InputSet(make_box(lo, hi)); }

bool InputSet::contains(const Vec& u, double tol) const {
  return !bounded() || ibckit::contains(*bounds_, u, tol) != Location::kOutside;
}

bool InputSet::interior(const Vec& u) const {
  return !bounded() || ibckit::contains(*bounds_, u) == Location::kInterior;
}

VertexLp invariance_lp(const LinearSystem& sys, const Polytope& x, const Vec& vertex,
                       const InputSet& inputs, Strictness strictness) {
  return margin_lp(sys, x, vertex, inputs, strictness, 1.0);
}

VertexLp backward_invariance_lp(const LinearSystem& sys, const Polytope& x, const Vec& vertex,
                                const InputSet& inputs, Strictness strictness) {
  return margin_lp(sys, x, vertex, inputs, strictness, -1.0);
}

VertexLp cone_dip_lp(const LinearSystem& sys, const Polytope& x, const Vec& vertex) {
  const TangentCone cone = tangent_cone(x, vertex);
  const int m = sys.m();
  const int rows = static_cast<int>(cone.normals.size());
  lp::Problem p;
  p.objective = Vec::Zero(m + 1);
  p.objective[m] = 1.0;
  p.a = Mat::Zero(rows, m + 1);
  p.b = Vec::Zero(rows);
  for (int r = 0; r < rows; ++r) {
    p.a.row(r).head(m) = cone.normals[r].transpose() * sys.b();
    p.a(r, m) = 1.0;
  }
  p.lower = Vec::Constant(m + 1, -1.0);
  p.upper = Vec::Constant(m + 1, 1.0);
  p.lower[m] = -kInf;
  p.upper[m] = kMarginCap;

  const lp::Result res = lp::solve(p);
  if (res.status != lp::Status::kOptimal)
    throw Error(ErrorCode::kLpFailure,
                std::string("cone LP ") + lp::to_string(res.status) + " at " + format_vec(vertex));
  VertexLp out;
  out.margin = res.x[m];
  out.witness = sys.b() * res.x.head(m);
  out.feasible = out.margin > kTolLp;
  return out;
}

bool in_equilibria(const Mat& equilibrium_basis, const Vec& v) {
  return distance_to_equilibria(equilibrium_basis, v) <= kTolLin * (1.0 + v.norm());
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kIbc: return "IBC";
    case Verdict::kNotIbc: return "NOT_IBC";
    case Verdict::kNecessaryConditionsHold: return "NECESSARY_CONDITIONS_HOLD";
    case Verdict::kInconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

const char* to_string(Route r) {
  switch (r) {
    case Route::kNone: return "none";
    case Route::kVertexGeometry: return "vertex-geometry";
    case Route::kInvarianceConditions: return "invariance-conditions";
  }
  return "?";
}

IbcCertificate check_ibc(const LinearSystem& sys, const Polytope& x, const InputSet& inputs,
                         const CheckOptions& options) {
  if (x.dim() != sys.n()) throw Error(ErrorCode::kInvalidArgument, "polytope dimension != n");
  if (contains(x, Vec::Zero(x.dim())) != Location::kInterior)
    throw Error(ErrorCode::kOriginNotInterior, "0 must be interior to the region");

  IbcCertificate cert;
  cert.controllable = is_controllable(sys);
  cert.simplicial = is_simplicial(x);
  cert.inputs_bounded = inputs.bounded();
  const Mat o = equilibrium_set(sys);

  bool geometry_ok = true;
  for (const Vec& v : x.vertices()) {
    VertexRecord rec;
    rec.vertex = v;
    rec.in_o = in_equilibria(o, v);
    if (!rec.in_o) {
      rec.cone_dip = cone_dip_lp(sys, x, v);
      geometry_ok = geometry_ok && rec.cone_dip->feasible;
    }
    cert.vertices.push_back(std::move(rec));
  }

  if (!cert.controllable) {
    cert.verdict = Verdict::kNotIbc;
    cert.reason = "(A, B) is not controllable";
    return cert;
  }

  if (geometry_ok) {
    cert.route = Route::kVertexGeometry;
    if (!inputs.bounded()) {
      cert.verdict = Verdict::kIbc;
      cert.reason = "every vertex is an equilibrium or Im(B) meets its open tangent cone";
      return cert;
    }
    bool strict_ok = true;
    for (VertexRecord& rec : cert.vertices) {
      if (rec.in_o) {
        const Vec u = equilibrium_input(sys, rec.vertex);
        if (!inputs.interior(u)) {
          strict_ok = false;
          cert.failing_vertices.push_back(rec.vertex);
        }
        continue;
      }
      rec.invariance = invariance_lp(sys, x, rec.vertex, inputs, Strictness::kStrict);
      rec.backward = backward_invariance_lp(sys, x, rec.vertex, inputs, Strictness::kStrict);
      if (!rec.invariance->feasible || !rec.backward->feasible) {
        strict_ok = false;
        cert.failing_vertices.push_back(rec.vertex);
      }
    }
    if (strict_ok) {
      cert.verdict = Verdict::kIbc;
      cert.reason = "vertex geometry holds and strict LPs are solvable under the input bound";
      return cert;
    }
    cert.failing_vertices.clear();
  }

  // Non-strict invariance conditions at every vertex.
  for (VertexRecord& rec : cert.vertices) {
    rec.invariance = invariance_lp(sys, x, rec.vertex, inputs, Strictness::kNonStrict);
    rec.backward = backward_invariance_lp(sys, x, rec.vertex, inputs, Strictness::kNonStrict);
    if (!rec.invariance->feasible || !rec.backward->feasible)
      cert.failing_vertices.push_back(rec.vertex);
  }
  if (!cert.failing_vertices.empty()) {
    cert.route = Route::kNone;
    cert.verdict = Verdict::kNotIbc;
    cert.reason = "invariance conditions fail at";
    for (const Vec& v : cert.failing_vertices) cert.reason += " " + format_vec(v);
    return cert;
  }
  if (!cert.simplicial) {
    cert.route = Route::kNone;
    cert.verdict = Verdict::kInconclusive;
    cert.reason = "non-simplicial region; vertex geometry fails and the LPs are solvable";
    return cert;
  }
  cert.route = Route::kInvarianceConditions;
  if (!inputs.bounded() || options.assume_mild_input_condition) {
    cert.verdict = Verdict::kIbc;
    cert.reason = "simplicial region with solvable forward and backward invariance conditions";
  } else {
    cert.verdict = Verdict::kNecessaryConditionsHold;
    cert.reason = "invariance conditions hold under the input bound (necessary only)";
  }
  return cert;
}

std::vector<Vec> equilibrium_projections(const Decomposition& d, const Polytope& p) {
  std::vector<Vec> out;
  out.reserve(p.vertices().size());
  for (const Vec& v : p.vertices()) out.push_back(d.equilibrium_part(v));
  return out;
}

Polytope construct_ibc_polytope(const LinearSystem& sys, const Polytope& p, double alpha) {
  if (!(alpha > 1.0)) throw Error(ErrorCode::kAlphaTooSmall, "alpha must exceed 1");
  if (p.dim() != sys.n()) throw Error(ErrorCode::kInvalidArgument, "polytope dimension != n");
  if (contains(p, Vec::Zero(p.dim())) != Location::kInterior)
    throw Error(ErrorCode::kOriginNotInterior, "0 must be interior to P");
  if (!is_controllable(sys))
    throw Error(ErrorCode::kDecompositionFails, "(A, B) is not controllable");
  const Decomposition d = decompose(sys);

  std::vector<Vec> points = p.vertices();
  for (const Vec& o : equilibrium_projections(d, p)) {
    const Vec scaled = alpha * o;
    if (scaled.norm() > 0.0) points.push_back(scaled);
  }
  Polytope x = hull_from_points(points);

  const Mat basis = equilibrium_set(sys);
  for (const Vec& v : x.vertices()) {
    if (in_equilibria(basis, v)) continue;
    if (!cone_dip_lp(sys, x, v).feasible)
      throw Error(ErrorCode::kConstructionUnverified,
                  "constructed vertex " + format_vec(v) + " is neither an equilibrium nor cone-dipped");
  }
  return x;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = 20; k >= 1; --k) grid.push_back(k / 20.0);
  return grid;
}

RescaleResult rescale_velocity_axes(const LinearSystem& sys, const Polytope& x,
                                    const InputSet& inputs, const std::vector<int>& axes,
                                    const std::vector<double>& grid) {
  if (!inputs.bounded()) throw Error(ErrorCode::kInvalidArgument, "rescaling needs a bounded U");
  for (int a : axes)
    if (a < 0 || a >= x.dim()) throw Error(ErrorCode::kInvalidArgument, "axis index out of range");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  const Mat basis = equilibrium_set(sys);
  for (double lambda : sorted) {
    if (!(lambda > 0.0)) continue;
    std::vector<Vec> pts;
    for (const Vec& v : x.vertices()) {
      Vec w = v;
      if (!in_equilibria(basis, v))
        for (int a : axes) w[a] *= lambda;
      pts.push_back(w);
    }
    Polytope candidate = hull_from_points(pts);
    bool ok = true;
    for (const Vec& v : candidate.vertices()) {
      if (in_equilibria(basis, v)) continue;
      if (!invariance_lp(sys, candidate, v, inputs, Strictness::kStrict).feasible ||
          !backward_invariance_lp(sys, candidate, v, inputs, Strictness::kStrict).feasible) {
        ok = false;
        break;
      }
    }
    if (ok) return RescaleResult{std::move(candidate), lambda};
  }
  throw Error(ErrorCode::kNoFeasibleScale, "no grid value yields strict invariance under U");
}

double achieved_margin(const LinearSystem& sys, const Polytope& x, const Vec& vertex, const Vec& u,
                       bool backward) {
  const TangentCone cone = tangent_cone(x, vertex);
  Vec f = sys.field(vertex, u);
  if (backward) f = -f;
  double worst = kInf;
  for (const Vec& h : cone.normals) worst = std::min(worst, -h.dot(f));
  return worst;
}

}  // namespace ibckit
