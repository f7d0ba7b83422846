#pragma once

#include "ibckit/common.hpp"

namespace ibckit::lp {

/// maximize objective . x  subject to  a x <= b,  lower <= x <= upper.
/// Bounds may be +-infinity.
struct Problem {
  Vec objective;
  Mat a;
  Vec b;
  Vec lower;
  Vec upper;
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(Status s);

struct Result {
  Status status = Status::kInfeasible;
  Vec x;
  double value = 0.0;
};

/// Dense two-phase primal simplex with Bland's anti-cycling rule. Intended for
/// the tiny per-vertex problems of the invariance checks.
Result solve(const Problem& problem);

}  // namespace ibckit::lp
