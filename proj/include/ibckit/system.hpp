#pragma once

#include "ibckit/common.hpp"

namespace ibckit {

/// x' = A x + B u + a
struct AffineSystem {
  Mat a_mat;
  Mat b_mat;
  Vec offset;

  int n() const { return static_cast<int>(a_mat.rows()); }
  int m() const { return static_cast<int>(b_mat.cols()); }
};

/// Coordinate shift x = x_tilde + state_shift, u = u_tilde - input_shift that
/// removes the affine term: A * state_shift + a = B * input_shift.
struct ShiftRecord {
  Vec state_shift;
  Vec input_shift;
};

/// x' = A x + B u with rank(B) = m.
class LinearSystem {
 public:
  LinearSystem(Mat a, Mat b, ShiftRecord shift = {});

  const Mat& a() const { return a_; }
  const Mat& b() const { return b_; }
  int n() const { return static_cast<int>(a_.rows()); }
  int m() const { return static_cast<int>(b_.cols()); }
  const ShiftRecord& shift() const { return shift_; }

  Vec field(const Vec& x, const Vec& u) const { return a_ * x + b_ * u; }

 private:
  Mat a_;
  Mat b_;
  ShiftRecord shift_;
};

/// Basis b_1..b_m of Im(B) completed by o_{m+1}..o_n from the equilibrium set.
struct Decomposition {
  Mat b_basis;        // n x m
  Mat o_complement;   // n x (n - m)
  Mat t;              // [b_1 .. b_m o_{m+1} .. o_n]
  Mat t_o;            // same with the b-columns zeroed
  Mat t_inv;

  /// Component of x along the chosen equilibrium directions: T_O T^{-1} x.
  Vec equilibrium_part(const Vec& x) const { return t_o * (t_inv * x); }
};

LinearSystem shift_to_linear(const AffineSystem& sys);

bool is_controllable(const LinearSystem& sys);

/// Kalman matrix [B AB ... A^{n-1}B].
Mat controllability_matrix(const LinearSystem& sys);

/// Orthonormal basis (columns) of {x : A x in Im(B)}.
Mat equilibrium_set(const LinearSystem& sys);

/// Distance from x to the equilibrium subspace.
double distance_to_equilibria(const Mat& equilibrium_basis, const Vec& x);

/// True when the equilibrium set and Im(B) together span R^n.
bool spans_state_space(const LinearSystem& sys);

Decomposition decompose(const LinearSystem& sys);

}  // namespace ibckit
