#include "ibckit/system.hpp"

#include "ibckit/linalg.hpp"

#include <cmath>
#include <vector>

namespace ibckit {

LinearSystem::LinearSystem(Mat a, Mat b, ShiftRecord shift)
    : a_(std::move(a)), b_(std::move(b)), shift_(std::move(shift)) {
  if (a_.rows() != a_.cols() || b_.rows() != a_.rows() || b_.cols() < 1)
    throw Error(ErrorCode::kInvalidArgument, "A must be n x n and B n x m");
  if (b_.cols() > b_.rows()) throw Error(ErrorCode::kInvalidArgument, "m must not exceed n");
  if (linalg::rank(b_) != b_.cols())
    throw Error(ErrorCode::kInvalidArgument, "B must have full column rank");
  if (shift_.state_shift.size() == 0) shift_.state_shift = Vec::Zero(a_.rows());
  if (shift_.input_shift.size() == 0) shift_.input_shift = Vec::Zero(b_.cols());
}

LinearSystem shift_to_linear(const AffineSystem& sys) {
  const int n = sys.n();
  const int m = sys.m();
  Vec offset = sys.offset.size() == 0 ? Vec::Zero(n) : sys.offset;
  if (offset.size() != n) throw Error(ErrorCode::kInvalidArgument, "offset has wrong size");

  Mat stacked(n, n + m);
  stacked << sys.a_mat, -sys.b_mat;
  const Vec z = stacked.completeOrthogonalDecomposition().solve(-offset);
  const double residual = (stacked * z + offset).norm();
  if (residual > kTolLin * (1.0 + offset.norm()) * std::max(1.0, stacked.norm()))
    throw Error(ErrorCode::kNoShiftExists, "offset is not in Im(A) + Im(B)");
  ShiftRecord shift{z.head(n), z.tail(m)};
  return LinearSystem(sys.a_mat, sys.b_mat, shift);
}

Mat controllability_matrix(const LinearSystem& sys) {
  const int n = sys.n();
  const int m = sys.m();
  Mat k(n, n * m);
  Mat block = sys.b();
  for (int i = 0; i < n; ++i) {
    k.middleCols(i * m, m) = block;
    block = sys.a() * block;
  }
  return k;
}

bool is_controllable(const LinearSystem& sys) {
  return linalg::rank(controllability_matrix(sys)) == sys.n();
}

Mat equilibrium_set(const LinearSystem& sys) {
  const int n = sys.n();
  const Mat p_b = linalg::range_projector(sys.b());
  const Mat residual = (Mat::Identity(n, n) - p_b) * sys.a();
  // An all-zero residual (e.g. square B) makes every state an equilibrium.
  if (residual.cwiseAbs().maxCoeff() <= kTolLin * std::max(1.0, sys.a().cwiseAbs().maxCoeff()))
    return Mat::Identity(n, n);
  Mat basis = linalg::null_basis(residual);
  // Sign convention: largest-magnitude entry of each column positive.
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index idx;
    basis.col(j).cwiseAbs().maxCoeff(&idx);
    if (basis(idx, j) < 0) basis.col(j) *= -1.0;
  }
  return basis;
}

double distance_to_equilibria(const Mat& equilibrium_basis, const Vec& x) {
  return (x - equilibrium_basis * (equilibrium_basis.transpose() * x)).norm();
}

bool spans_state_space(const LinearSystem& sys) {
  const Mat o = equilibrium_set(sys);
  Mat stacked(sys.n(), o.cols() + sys.m());
  stacked << sys.b(), o;
  return linalg::rank(stacked) == sys.n();
}

Decomposition decompose(const LinearSystem& sys) {
  const int n = sys.n();
  const int m = sys.m();
  const Mat o = equilibrium_set(sys);
  if (!spans_state_space(sys))
    throw Error(ErrorCode::kDecompositionFails, "equilibrium set + Im(B) does not span R^n");

  // Greedy pivoted Gram-Schmidt of the equilibrium basis against Im(B).
  Mat span = linalg::range_basis(sys.b());
  std::vector<bool> used(o.cols(), false);
  Mat chosen(n, n - m);
  for (int k = 0; k < n - m; ++k) {
    int best = -1;
    double best_norm = 0.0;
    Vec best_residual;
    for (Eigen::Index j = 0; j < o.cols(); ++j) {
      if (used[j]) continue;
      const Vec r = o.col(j) - span * (span.transpose() * o.col(j));
      if (r.norm() > best_norm) {
        best_norm = r.norm();
        best = static_cast<int>(j);
        best_residual = r;
      }
    }
    if (best < 0 || best_norm <= kTolLin)
      throw Error(ErrorCode::kDecompositionFails, "could not complete a basis from equilibria");
    used[best] = true;
    chosen.col(k) = o.col(best);
    span.conservativeResize(Eigen::NoChange, span.cols() + 1);
    span.col(span.cols() - 1) = best_residual / best_norm;
  }

  Decomposition d;
  d.b_basis = sys.b();
  d.o_complement = chosen;
  d.t.resize(n, n);
  d.t << sys.b(), chosen;
  d.t_o = Mat::Zero(n, n);
  d.t_o.rightCols(n - m) = chosen;
  d.t_inv = d.t.inverse();
  return d;
}

}  // namespace ibckit
