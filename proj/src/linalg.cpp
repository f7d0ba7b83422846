#include "ibckit/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace ibckit {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kNotAVertex: return "NotAVertex";
    case ErrorCode::kOriginNotInterior: return "OriginNotInterior";
    case ErrorCode::kNoShiftExists: return "NoShiftExists";
    case ErrorCode::kDecompositionFails: return "DecompositionFails";
    case ErrorCode::kLpFailure: return "LPFailure";
    case ErrorCode::kAlphaTooSmall: return "AlphaTooSmall";
    case ErrorCode::kNoFeasibleScale: return "NoFeasibleScale";
    case ErrorCode::kAssignmentFails: return "AssignmentFails";
    case ErrorCode::kDegenerateSimplex: return "DegenerateSimplex";
    case ErrorCode::kOutsideDomain: return "OutsideDomain";
    case ErrorCode::kSingularGramian: return "SingularGramian";
    case ErrorCode::kSingularLinearization: return "SingularLinearization";
    case ErrorCode::kPolicyDomain: return "PolicyDomainError";
    case ErrorCode::kSteeringFailed: return "SteeringFailed";
    case ErrorCode::kReplanInfeasible: return "ReplanInfeasible";
    case ErrorCode::kConstructionUnverified: return "ConstructionUnverified";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSchema: return "SchemaError";
  }
  return "Unknown";
}

std::string format_vec(const Vec& v) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << ')';
  return os.str();
}

namespace linalg {
namespace {

int rank_from_singular_values(const Vec& sv, double rel_tol) {
  if (sv.size() == 0) return 0;
  const double cutoff = rel_tol * sv[0];
  if (sv[0] == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++r;
  return r;
}

}  // namespace

int rank(const Mat& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  return rank_from_singular_values(svd.singularValues(), rel_tol);
}

Mat range_basis(const Mat& m, double rel_tol) {
  if (m.size() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU);
  const int r = rank_from_singular_values(svd.singularValues(), rel_tol);
  return svd.matrixU().leftCols(r);
}

Mat null_basis(const Mat& m, double rel_tol) {
  const auto cols = m.cols();
  if (m.rows() == 0) return Mat::Identity(cols, cols);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const int r = rank_from_singular_values(svd.singularValues(), rel_tol);
  return svd.matrixV().rightCols(cols - r);
}

Mat range_projector(const Mat& m, double rel_tol) {
  const Mat q = range_basis(m, rel_tol);
  return q * q.transpose();
}

Mat expm(const Mat& a) {
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const auto n = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const Mat as = a / std::ldexp(1.0, s);

  const Mat id = Mat::Identity(n, n);
  const Mat a2 = as * as;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;
  const Mat u = as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                      b[3] * a2 + b[1] * id);
  const Mat v =
      a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

double condition_number(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0) return 1.0;
  const double smin = sv[sv.size() - 1];
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv[0] / smin;
}

}  // namespace linalg
}  // namespace ibckit
