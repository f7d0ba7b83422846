#pragma once

#include "ibckit/common.hpp"

namespace ibckit::linalg {

/// Numerical rank with cutoff `rel_tol * sigma_max`.
int rank(const Mat& m, double rel_tol = kTolLin);

/// Orthonormal basis (columns) of the column space of `m`.
Mat range_basis(const Mat& m, double rel_tol = kTolLin);

/// Orthonormal basis (columns) of the null space of `m`.
Mat null_basis(const Mat& m, double rel_tol = kTolLin);

/// Orthogonal projector onto the column space of `m`.
Mat range_projector(const Mat& m, double rel_tol = kTolLin);

/// Matrix exponential: scaling and squaring around a degree-13 Pade approximant.
Mat expm(const Mat& a);

double condition_number(const Mat& m);

}  // namespace ibckit::linalg
