#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ibckit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Tolerances shared across modules.
inline constexpr double kTolGeo = 1e-9;   // polytope incidence / membership
inline constexpr double kTolLin = 1e-8;   // relative singular-value cutoff
inline constexpr double kTolLp = 1e-7;    // strict vs. marginal LP margin
inline constexpr double kTolAct = 1e-6;   // active facet set of V(x)

enum class ErrorCode {
  kDegenerateInput,
  kNotAVertex,
  kOriginNotInterior,
  kNoShiftExists,
  kDecompositionFails,
  kLpFailure,
  kAlphaTooSmall,
  kNoFeasibleScale,
  kAssignmentFails,
  kDegenerateSimplex,
  kOutsideDomain,
  kSingularGramian,
  kSingularLinearization,
  kPolicyDomain,
  kSteeringFailed,
  kReplanInfeasible,
  kConstructionUnverified,
  kInvalidArgument,
  kSchema,
};

const char* to_string(ErrorCode code);

/// Base exception for every toolkit failure; `code()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

std::string format_vec(const Vec& v);

}  // namespace ibckit
