#include "ibckit/robots.hpp"

#include <algorithm>
#include <cmath>

namespace ibckit {

Vec arm_dynamics(const ArmParams& p, const Vec& state, double tau) {
  Vec d(2);
  d << state[1], (-p.mass * p.gravity * p.length * std::sin(state[0]) + tau) / p.inertia;
  return d;
}

double arm_fblin(const ArmParams& p, const Vec& state, double u) {
  return p.mass * p.gravity * p.length * std::sin(state[0]) + p.inertia * u;
}

Vec unicycle_dynamics(const Vec& state, const Vec& input) {
  Vec d(4);
  d << state[3] * std::cos(state[2]), state[3] * std::sin(state[2]), input[1], input[0];
  return d;
}

Vec unicycle_fblin(const UnicycleParams& p, const Vec& state, const Vec& v) {
  const double speed = state[3];
  if (std::abs(speed) < p.speed_cutoff)
    throw Error(ErrorCode::kSingularLinearization,
                "speed " + std::to_string(speed) + " is below the linearization cutoff");
  const double c = std::cos(state[2]);
  const double s = std::sin(state[2]);
  Vec u(2);
  u << v[0] * c + v[1] * s, (-v[0] * s + v[1] * c) / speed;
  return u;
}

double QuadrotorParams::derived_v_bound() const { return gravity * std::tan(angle_max); }

Vec quad_planar_dynamics(const QuadrotorParams& p, const Vec& state, const Vec& angles) {
  const double theta = angles[0];
  const double phi = angles[1];
  Vec d(4);
  d << state[2], state[3], p.gravity * std::tan(theta),
      -p.gravity * std::tan(phi) / std::cos(theta);
  return d;
}

Vec quad_angle_map(const QuadrotorParams& p, const Vec& v) {
  const double theta = std::atan(v[0] / p.gravity);
  const double phi = std::atan(-v[1] * std::cos(theta) / p.gravity);
  Vec a(2);
  a << theta, phi;
  return a;
}

Mat rotation_zyx(double psi, double theta, double phi) {
  Mat rz(3, 3), ry(3, 3), rx(3, 3);
  rz << std::cos(psi), -std::sin(psi), 0, std::sin(psi), std::cos(psi), 0, 0, 0, 1;
  ry << std::cos(theta), 0, std::sin(theta), 0, 1, 0, -std::sin(theta), 0, std::cos(theta);
  rx << 1, 0, 0, 0, std::cos(phi), -std::sin(phi), 0, std::sin(phi), std::cos(phi);
  return rz * ry * rx;
}

LinearSystem double_integrator_axis() {
  Mat a(2, 2);
  a << 0, 1, 0, 0;
  Mat b(2, 1);
  b << 0, 1;
  return LinearSystem(a, b);
}

Vec AxisProfile::local(double pos, double vel) const {
  Vec x(2);
  x << pos - center, vel;
  return x;
}

Location AxisProfile::classify(double pos, double vel, double tol) const {
  return contains(region, local(pos, vel), tol);
}

double AxisProfile::level(double pos, double vel) const { return lyapunov_V(region, local(pos, vel)); }

double AxisProfile::control(double pos, double vel, double tol) const {
  return controller.eval(local(pos, vel), tol)[0];
}

Polytope AxisProfile::global_region() const {
  Vec shift(2);
  shift << center, 0.0;
  return translate(region, shift);
}

namespace {

void validate(const AxisSpec& s) {
  if (!(s.pos_lo < s.pos_hi) || !(s.vel_lo < 0.0 && 0.0 < s.vel_hi) ||
      !(s.input_lo < 0.0 && 0.0 < s.input_hi))
    throw Error(ErrorCode::kInvalidArgument,
                "axis bounds must be ordered with 0 interior to the velocity and input ranges");
  if (s.alpha && !(*s.alpha > 1.0)) throw Error(ErrorCode::kAlphaTooSmall, "alpha must exceed 1");
  if (s.pbox_half_width && !(*s.pbox_half_width > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "box half-width must be positive");
}

double strict_margin(const LinearSystem& sys, const Polytope& x, const Vec& v, const InputSet& u) {
  const VertexLp fwd = invariance_lp(sys, x, v, u, Strictness::kStrict);
  const VertexLp bwd = backward_invariance_lp(sys, x, v, u, Strictness::kStrict);
  return std::min(fwd.margin, bwd.margin);
}

}  // namespace

double default_half_width(const AxisSpec& spec) {
  const double h = 0.5 * (spec.pos_hi - spec.pos_lo);
  if (spec.pbox_half_width) return *spec.pbox_half_width;
  if (spec.alpha) return h / *spec.alpha;
  // Facet from (x_b, V) to (h, 0) is strictly enterable with the full braking
  // input when V^2 < (h - x_b) |u|.
  const double v = std::max(spec.vel_hi, -spec.vel_lo);
  const double brake = std::min(spec.input_hi, -spec.input_lo);
  const double xb = h - kHalfWidthMargin * v * v / brake;
  // Too narrow an axis for full speed: halve the box and let the velocity rescale.
  return xb >= 0.2 * h ? xb : 0.5 * h;
}

AxisProfile safe_speed_profile(const AxisSpec& spec, const std::vector<double>& grid) {
  validate(spec);
  AxisProfile out;
  out.spec = spec;
  out.center = 0.5 * (spec.pos_lo + spec.pos_hi);
  const double h = 0.5 * (spec.pos_hi - spec.pos_lo);
  out.half_width = default_half_width(spec);
  if (!(out.half_width < h))
    throw Error(ErrorCode::kInvalidArgument, "box half-width must be below the position half-range");
  out.alpha = h / out.half_width;

  const LinearSystem sys = double_integrator_axis();
  Vec lo(2), hi(2);
  lo << -out.half_width, spec.vel_lo;
  hi << out.half_width, spec.vel_hi;
  Polytope x = construct_ibc_polytope(sys, make_box(lo, hi), out.alpha);

  Vec ulo(1), uhi(1);
  ulo << spec.input_lo;
  uhi << spec.input_hi;
  const InputSet inputs = InputSet::box(ulo, uhi);
  const Mat basis = equilibrium_set(sys);

  auto margins_ok = [&](const Polytope& region, double& worst) {
    worst = kMarginCap;
    for (const Vec& v : region.vertices())
      if (!in_equilibria(basis, v)) worst = std::min(worst, strict_margin(sys, region, v, inputs));
    return worst > kTolLp;
  };

  double worst = 0.0;
  if (!margins_ok(x, worst)) {
    RescaleResult r = rescale_velocity_axes(sys, x, inputs, {1}, grid);
    x = std::move(r.region);
    out.lambda = r.lambda;
    margins_ok(x, worst);
  }
  out.min_margin = worst;
  out.controller = build_pwl(sys, x, inputs);
  out.region = std::move(x);
  return out;
}

AxisSpec arm_axis_spec(double input_limit) {
  AxisSpec s;
  s.pos_lo = -std::numbers::pi / 2.0;
  s.pos_hi = std::numbers::pi / 2.0;
  s.vel_lo = -1.0;
  s.vel_hi = 1.0;
  s.input_lo = -input_limit;
  s.input_hi = input_limit;
  s.alpha = 1.2;
  return s;
}

AxisSpec unicycle_axis_spec(const UnicycleParams& p) {
  AxisSpec s;
  s.pos_lo = -p.pos_max;
  s.pos_hi = p.pos_max;
  s.vel_lo = -p.vel_max;
  s.vel_hi = p.vel_max;
  s.input_lo = -p.v_max;
  s.input_hi = p.v_max;
  s.alpha = 1.5;
  return s;
}

AxisSpec quadrotor_axis_spec(const QuadrotorParams& p) {
  AxisSpec s;
  s.pos_lo = -p.pos_max;
  s.pos_hi = p.pos_max;
  s.vel_lo = -p.vel_max;
  s.vel_hi = p.vel_max;
  s.input_lo = -p.v_max;
  s.input_hi = p.v_max;
  return s;
}

}  // namespace ibckit
