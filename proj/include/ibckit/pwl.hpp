#pragma once

#include "ibckit/ibc.hpp"

#include <vector>

namespace ibckit {

/// Inputs at the vertices of `x`, parallel to x.vertices(). Equilibrium vertices
/// get the least-squares solution of B u = -A v; the others the strict-LP witness.
std::vector<Vec> assign_vertex_controls(const LinearSystem& sys, const Polytope& x,
                                        const InputSet& inputs);

/// Continuous feedback, linear on each simplex of the origin fan of X.
class PwlController {
 public:
  PwlController() = default;

  int n() const { return n_; }
  int m() const { return m_; }
  const Triangulation& triangulation() const { return tri_; }
  const std::vector<Mat>& gains() const { return gains_; }
  /// Controls at triangulation().points; the origin (last point) maps to 0.
  const std::vector<Vec>& point_controls() const { return controls_; }

  /// Index of the first simplex whose barycentric coordinates of `x` are all >= -tol, or -1.
  int locate(const Vec& x, double tol = kTolGeo) const;

  /// Throws OutsideDomain when `x` is in no simplex.
  Vec eval(const Vec& x, double tol = kTolGeo) const;

  friend PwlController build_pwl_from_controls(const Polytope& x, std::vector<Vec> vertex_controls);

 private:
  int n_ = 0;
  int m_ = 0;
  Triangulation tri_;
  std::vector<Mat> gains_;
  std::vector<Mat> edge_inverse_;  // inverse of [p_1 .. p_n] for the non-origin simplex vertices
  std::vector<Vec> controls_;
};

PwlController build_pwl(const LinearSystem& sys, const Polytope& x, const InputSet& inputs);

/// Builds the controller from explicit vertex controls (parallel to x.vertices()).
PwlController build_pwl_from_controls(const Polytope& x, std::vector<Vec> vertex_controls);

/// V(x) = max_i n_i . x over the normalized facets of X.
double lyapunov_V(const Polytope& x, const Vec& state);

/// max over facets active at `state` of n_i . (A x + B u_p(x)).
double dini_derivative(const LinearSystem& sys, const PwlController& ctrl, const Polytope& x,
                       const Vec& state);

/// Open-loop minimum-energy transfer x0 -> xf over [0, tf].
class GramianSteering {
 public:
  GramianSteering(const LinearSystem& sys, const Vec& x0, const Vec& xf, double tf);

  /// u(t) = B^T e^{A^T (tf - t)} W^{-1} (xf - e^{A tf} x0); zero outside [0, tf].
  Vec input(double t) const;

  /// Simpson average of input() over [t, t + dt]: the value to hold over one
  /// zero-order-hold step, accurate to second order in dt.
  Vec held_input(double t, double dt) const;

  const Mat& gramian() const { return w_; }
  double horizon() const { return tf_; }

 private:
  Mat a_;
  Mat b_;
  Mat w_;
  Vec eta_;
  double tf_;
};

/// Quadrature panels for the Gramian integral (composite Simpson).
inline constexpr int kGramianPanels = 2000;
/// Largest accepted condition number of W(tf).
inline constexpr double kGramianMaxCondition = 1e12;

}  // namespace ibckit
