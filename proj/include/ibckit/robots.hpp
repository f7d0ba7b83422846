#pragma once

#include "ibckit/pwl.hpp"

#include <numbers>
#include <optional>
#include <vector>

namespace ibckit {

/// Single-link arm I theta'' = -m g l sin(theta) + tau.
struct ArmParams {
  double inertia = 1.0;
  double mass = 1.0;
  double length = 0.5;
  double gravity = 10.0;
  double tau_max = 10.0;
};

/// d/dt (theta, theta_dot).
Vec arm_dynamics(const ArmParams& p, const Vec& state, double tau);

/// Torque that makes theta'' = u.
double arm_fblin(const ArmParams& p, const Vec& state, double u);

/// Unicycle with acceleration inputs: state (x1, x2, heading, speed), input (u1, u2).
struct UnicycleParams {
  double u1_max = 10.0;        // linear acceleration
  double u2_max = 5.0;         // steering rate
  double v_max = 5.0;          // bound on each linearized input
  double speed_cutoff = std::numbers::sqrt2;
  double pos_max = 30.0;
  double vel_max = 7.0;
};

Vec unicycle_dynamics(const Vec& state, const Vec& input);

/// (u1, u2) with x1'' = v1 and x2'' = v2. Throws SingularLinearization below the cutoff.
Vec unicycle_fblin(const UnicycleParams& p, const Vec& state, const Vec& v);

/// Planar quadrotor at fixed altitude and zero yaw: state (x, y, x_dot, y_dot).
struct QuadrotorParams {
  double gravity = 9.81;
  double angle_max = 0.32;   // |theta_d|, |phi_d|
  double v_max = 3.247;      // bound on each linearized input
  double pos_max = 2.0;
  double vel_max = 2.0;
  double hover_height = 1.0;

  /// g tan(angle_max): the largest v1 keeping |theta_d| within the limit.
  double derived_v_bound() const;
};

/// Input is the attitude (theta, phi).
Vec quad_planar_dynamics(const QuadrotorParams& p, const Vec& state, const Vec& angles);

/// (theta_d, phi_d) realizing (x'', y'') = v.
Vec quad_angle_map(const QuadrotorParams& p, const Vec& v);

/// R_z(psi) R_y(theta) R_x(phi).
Mat rotation_zyx(double psi, double theta, double phi);

/// The shared per-axis linearized model x'' = v.
LinearSystem double_integrator_axis();

/// Bounds for one double-integrator axis.
struct AxisSpec {
  double pos_lo = -1.0;
  double pos_hi = 1.0;
  double vel_lo = -1.0;
  double vel_hi = 1.0;
  double input_lo = -1.0;
  double input_hi = 1.0;
  std::optional<double> alpha;
  std::optional<double> pbox_half_width;
};

/// Safe position-velocity region of one axis with its certifying feedback.
/// The region and controller live in local coordinates (pos - center, vel).
struct AxisProfile {
  AxisSpec spec;
  double center = 0.0;
  double half_width = 0.0;  // position half-width of the initial box
  double alpha = 0.0;
  double lambda = 1.0;      // velocity rescale applied after construction
  double min_margin = 0.0;  // smallest strict LP margin over non-equilibrium vertices
  Polytope region;
  PwlController controller;

  Vec local(double pos, double vel) const;
  Location classify(double pos, double vel, double tol = kTolGeo) const;
  double level(double pos, double vel) const;
  double control(double pos, double vel, double tol = kTolGeo) const;
  /// The region in (pos, vel) coordinates.
  Polytope global_region() const;
};

/// Margin factor for the default initial-box width: the facet inequality at the
/// box corner must hold with V^2 / |u_dec| scaled by this factor.
inline constexpr double kHalfWidthMargin = 1.05;

/// Position half-width of the initial box when neither alpha nor a width is given.
double default_half_width(const AxisSpec& spec);

AxisProfile safe_speed_profile(const AxisSpec& spec,
                               const std::vector<double>& grid = default_lambda_grid());

AxisSpec arm_axis_spec(double input_limit);
AxisSpec unicycle_axis_spec(const UnicycleParams& p = {});
AxisSpec quadrotor_axis_spec(const QuadrotorParams& p = {});

}  // namespace ibckit
