#include "ibckit/pwl.hpp"

#include "ibckit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ibckit {

std::vector<Vec> assign_vertex_controls(const LinearSystem& sys, const Polytope& x,
                                        const InputSet& inputs) {
  const Mat basis = equilibrium_set(sys);
  std::vector<Vec> out;
  out.reserve(x.vertices().size());
  for (const Vec& v : x.vertices()) {
    if (in_equilibria(basis, v)) {
      const Vec u = sys.b().colPivHouseholderQr().solve(-(sys.a() * v));
      if (!inputs.contains(u))
        throw Error(ErrorCode::kAssignmentFails,
                    "equilibrium input at " + format_vec(v) + " violates the input bound");
      out.push_back(u);
      continue;
    }
    if (!cone_dip_lp(sys, x, v).feasible)
      throw Error(ErrorCode::kAssignmentFails,
                  "vertex " + format_vec(v) + " is neither an equilibrium nor cone-dipped");
    const VertexLp lp = invariance_lp(sys, x, v, inputs, Strictness::kStrict);
    if (!lp.feasible)
      throw Error(ErrorCode::kAssignmentFails,
                  "no strictly inward input at " + format_vec(v) + " within the input bound");
    out.push_back(lp.witness);
  }
  return out;
}

PwlController build_pwl(const LinearSystem& sys, const Polytope& x, const InputSet& inputs) {
  return build_pwl_from_controls(x, assign_vertex_controls(sys, x, inputs));
}

PwlController build_pwl_from_controls(const Polytope& x, std::vector<Vec> vertex_controls) {
  if (vertex_controls.size() != x.vertices().size() || vertex_controls.empty())
    throw Error(ErrorCode::kInvalidArgument, "one control per vertex required");
  PwlController c;
  c.n_ = x.dim();
  c.m_ = static_cast<int>(vertex_controls.front().size());
  c.tri_ = triangulate_with_origin(x);
  c.controls_ = std::move(vertex_controls);
  c.controls_.push_back(Vec::Zero(c.m_));

  const int n = c.n_;
  for (const auto& simplex : c.tri_.simplices) {
    // [V 1] [K^T; g^T] = W, one row per simplex vertex.
    Mat lhs(n + 1, n + 1);
    Mat rhs(n + 1, c.m_);
    for (int r = 0; r <= n; ++r) {
      lhs.row(r).head(n) = c.tri_.points[simplex[r]].transpose();
      lhs(r, n) = 1.0;
      rhs.row(r) = c.controls_[simplex[r]].transpose();
    }
    const Eigen::FullPivLU<Mat> lu(lhs);
    if (!lu.isInvertible() || linalg::condition_number(lhs) > 1.0 / kTolLin)
      throw Error(ErrorCode::kDegenerateSimplex, "simplex vertex matrix is singular");
    const Mat sol = lu.solve(rhs);
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    if (sol.row(n).cwiseAbs().maxCoeff() > kTolLin * scale)
      throw Error(ErrorCode::kDegenerateSimplex, "affine offset on an origin simplex is nonzero");
    c.gains_.push_back(sol.topRows(n).transpose());

    Mat edges(n, n);
    for (int k = 0; k < n; ++k) edges.col(k) = c.tri_.points[simplex[k + 1]];
    c.edge_inverse_.push_back(edges.inverse());
  }
  return c;
}

int PwlController::locate(const Vec& x, double tol) const {
  for (std::size_t i = 0; i < edge_inverse_.size(); ++i) {
    const Vec lam = edge_inverse_[i] * x;
    if (lam.minCoeff() >= -tol && 1.0 - lam.sum() >= -tol) return static_cast<int>(i);
  }
  return -1;
}

Vec PwlController::eval(const Vec& x, double tol) const {
  const int i = locate(x, tol);
  if (i < 0) throw Error(ErrorCode::kOutsideDomain, "state " + format_vec(x) + " is outside X");
  return gains_[i] * x;
}

double lyapunov_V(const Polytope& x, const Vec& state) {
  double v = -std::numeric_limits<double>::infinity();
  for (const Vec& n : x.normalized_normals()) v = std::max(v, n.dot(state));
  return v;
}

double dini_derivative(const LinearSystem& sys, const PwlController& ctrl, const Polytope& x,
                       const Vec& state) {
  const double v = lyapunov_V(x, state);
  const Vec f = sys.field(state, ctrl.eval(state));
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec& n : x.normalized_normals())
    if (std::abs(n.dot(state) - v) <= kTolAct) best = std::max(best, n.dot(f));
  return best;
}

GramianSteering::GramianSteering(const LinearSystem& sys, const Vec& x0, const Vec& xf, double tf)
    : a_(sys.a()), b_(sys.b()), tf_(tf) {
  if (!(tf > 0.0)) throw Error(ErrorCode::kInvalidArgument, "horizon must be positive");
  if (!is_controllable(sys))
    throw Error(ErrorCode::kSingularGramian, "(A, B) is not controllable");
  const int n = sys.n();
  const double h = tf / kGramianPanels;
  const Mat step = linalg::expm(a_ * h);
  const Mat bbt = b_ * b_.transpose();
  Mat e = Mat::Identity(n, n);
  w_ = Mat::Zero(n, n);
  for (int k = 0; k <= kGramianPanels; ++k) {
    const double weight = (k == 0 || k == kGramianPanels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    w_ += weight * (e * bbt * e.transpose());
    e = e * step;
  }
  w_ *= h / 3.0;
  if (linalg::condition_number(w_) > kGramianMaxCondition)
    throw Error(ErrorCode::kSingularGramian, "Gramian is ill-conditioned");
  eta_ = w_.ldlt().solve(xf - linalg::expm(a_ * tf) * x0);
}

Vec GramianSteering::input(double t) const {
  // Rounding of accumulated step times must not switch the input off early.
  if (t < 0.0 || t > tf_ * (1.0 + 1e-12)) return Vec::Zero(b_.cols());
  return b_.transpose() * linalg::expm(a_.transpose() * std::max(0.0, tf_ - t)) * eta_;
}

Vec GramianSteering::held_input(double t, double dt) const {
  return (input(t) + 4.0 * input(t + 0.5 * dt) + input(t + dt)) / 6.0;
}

}  // namespace ibckit
