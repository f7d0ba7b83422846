#pragma once

#include "ibckit/polytope.hpp"
#include "ibckit/system.hpp"

#include <optional>
#include <vector>

namespace ibckit {

/// Admissible inputs: all of R^m, or a polytope U in R^m with 0 in its interior.
class InputSet {
 public:
  InputSet() = default;  // unbounded
  explicit InputSet(Polytope bounds);

  static InputSet unbounded() { return {}; }
  static InputSet box(const Vec& lo, const Vec& hi);

  bool bounded() const { return bounds_.has_value(); }
  const Polytope& bounds() const { return *bounds_; }
  bool contains(const Vec& u, double tol = kTolGeo) const;
  bool interior(const Vec& u) const;

 private:
  std::optional<Polytope> bounds_;
};

enum class Strictness { kNonStrict, kStrict };

/// Result of a margin-maximizing vertex LP.
struct VertexLp {
  bool feasible = false;  // per the requested strictness
  double margin = 0.0;    // optimal epsilon
  Vec witness;            // u (invariance LPs) or b = B xi (cone dip)
};

/// Upper bound placed on the margin variable so the LP stays bounded when U is.
inline constexpr double kMarginCap = 1.0;

/// max eps  s.t.  h_j . (A v + B u) <= -eps for every facet through v, u in U.
VertexLp invariance_lp(const LinearSystem& sys, const Polytope& x, const Vec& vertex,
                       const InputSet& inputs, Strictness strictness);

/// Same as invariance_lp for the reversed vector field.
VertexLp backward_invariance_lp(const LinearSystem& sys, const Polytope& x, const Vec& vertex,
                                const InputSet& inputs, Strictness strictness);

/// Does Im(B) meet the interior of the tangent cone at `vertex`?
VertexLp cone_dip_lp(const LinearSystem& sys, const Polytope& x, const Vec& vertex);

/// Vertex lies on the equilibrium subspace (basis columns orthonormal).
bool in_equilibria(const Mat& equilibrium_basis, const Vec& v);

enum class Verdict {
  kIbc,
  kNotIbc,
  kNecessaryConditionsHold,  // bounded inputs without the caller's mild-assumption flag
  kInconclusive,             // non-simplicial, vertex-geometry test fails, LPs solvable
};

enum class Route {
  kNone,
  kVertexGeometry,        // every vertex is an equilibrium or Im(B) dips into its cone
  kInvarianceConditions,  // simplicial polytope, forward and backward LPs at every vertex
};

const char* to_string(Verdict v);
const char* to_string(Route r);

struct VertexRecord {
  Vec vertex;
  bool in_o = false;
  std::optional<VertexLp> invariance;
  std::optional<VertexLp> backward;
  std::optional<VertexLp> cone_dip;
};

struct IbcCertificate {
  Verdict verdict = Verdict::kNotIbc;
  Route route = Route::kNone;
  bool controllable = false;
  bool simplicial = false;
  bool inputs_bounded = false;
  std::vector<VertexRecord> vertices;
  std::vector<Vec> failing_vertices;
  std::string reason;
};

struct CheckOptions {
  /// Caller asserts that every equilibrium vertex admits an equilibrium input
  /// inside the interior of U, which makes the bounded-input conditions sufficient.
  bool assume_mild_input_condition = false;
};

IbcCertificate check_ibc(const LinearSystem& sys, const Polytope& x, const InputSet& inputs,
                         const CheckOptions& options = {});

/// Builds an IBC polytope around the origin from an initial polytope `p`
/// (0 interior) by appending alpha-scaled equilibrium projections of its vertices.
Polytope construct_ibc_polytope(const LinearSystem& sys, const Polytope& p, double alpha);

/// The projections T_O T^{-1} v_i for the vertices of `p` (before alpha scaling).
std::vector<Vec> equilibrium_projections(const Decomposition& d, const Polytope& p);

struct RescaleResult {
  Polytope region;
  double lambda = 1.0;
};

/// Default lambda grid 1.00, 0.95, ..., 0.05.
std::vector<double> default_lambda_grid();

/// Scales the listed state components of the non-equilibrium vertices of `x`
/// by the largest grid value for which every such vertex passes the strict
/// forward and backward LPs under `inputs`.
RescaleResult rescale_velocity_axes(const LinearSystem& sys, const Polytope& x,
                                    const InputSet& inputs, const std::vector<int>& axes,
                                    const std::vector<double>& grid = default_lambda_grid());

/// Smallest -h_j . (+-(A v + B u)) over the facets through `vertex`: the margin a
/// witness actually achieves. Used to re-verify LP output independently.
double achieved_margin(const LinearSystem& sys, const Polytope& x, const Vec& vertex, const Vec& u,
                       bool backward);

}  // namespace ibckit
