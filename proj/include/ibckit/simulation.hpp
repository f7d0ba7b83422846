#pragma once

#include "ibckit/robots.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ibckit {

/// One integration sample. `u` is the input held over [t, t + dt); the final
/// sample repeats the last applied input.
struct TrajectorySample {
  double t = 0.0;
  Vec x;
  Vec u;
  double v = 0.0;
  bool violation = false;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double dt = 0.0;
  std::string policy;
  std::string scenario;

  bool any_violation() const;
  std::optional<std::size_t> first_violation() const;
  const Vec& final_state() const { return samples.back().x; }
};

using Field = std::function<Vec(const Vec& x, const Vec& u)>;
using Policy = std::function<Vec(double t, const Vec& x)>;

/// Per-sample annotation: level V and whether the state left the safe set.
struct Monitor {
  std::function<double(const Vec&)> level;
  std::function<bool(const Vec&)> violated;
};

/// V = lyapunov_V(region, x); violation when contains(region, x) is Outside.
Monitor region_monitor(const Polytope& region, double tol = kTolGeo);

struct IntegrateOptions {
  double dt = 1e-3;
  double horizon = 1.0;
  double t0 = 0.0;
  std::optional<Monitor> monitor;
  /// Checked after every step; true ends the run at that sample.
  std::function<bool(double t, const Vec& x)> stop;
};

/// One classical RK4 step with `u` held.
Vec rk4_step(const Field& f, const Vec& x, const Vec& u, double dt);

/// Fixed-step RK4 with zero-order hold; t_k = t0 + k dt. OutsideDomain raised by
/// the policy is rethrown as PolicyDomain with the time and state.
Trajectory integrate(const Field& f, const Policy& policy, const Vec& x0, const IntegrateOptions& opts);

Field linear_field(const LinearSystem& sys);

/// Handover distance to the equilibrium subspace between the two steering phases.
inline constexpr double kSwitchDistance = 0.05;

struct SteerOptions {
  double dt = 1e-3;
  double switch_distance = kSwitchDistance;
};

struct SteerResult {
  Trajectory trajectory;
  double switch_time = 0.0;
  double endpoint_error = 0.0;
};

/// PWL feedback until within switch_distance of the equilibria (at most tf / 2),
/// then minimum-energy steering to xf over the remaining horizon. Throws
/// SteeringFailed naming the first sample outside `region`.
SteerResult safe_steer(const LinearSystem& sys, const Polytope& region, const PwlController& ctrl,
                       const Vec& x0, const Vec& xf, double tf, const SteerOptions& opts = {});

/// Minimum-energy steering alone; violations are recorded, not raised.
SteerResult gramian_run(const LinearSystem& sys, const Polytope& region, const Vec& x0,
                        const Vec& xf, double tf, double dt = 1e-3);

struct MissionOptions {
  double dt = 1e-3;
  double horizon = 150.0;
  double gain = 5.0;            // inner speed / heading loop
  double approach_gain = 1.0;   // speed command per metre near the goal
  double approach_decel = 0.5;  // m/s^2 of the braking speed envelope
  double heading_tol = 1e-5;
  double stop_speed = 1e-6;
  double done_tol = 0.01;       // along-track distance and speed at completion
  double pos_tol = 0.05;
  double speed_tol = 0.05;
};

struct MissionResult {
  Trajectory trajectory;  // state (x1, x2, heading, speed), input (u1, u2)
  std::vector<std::pair<std::string, double>> phases;  // phase name and start time
  double position_error = 0.0;
  double final_speed = 0.0;
};

/// Cartesian state (x1, x2, x1_dot, x2_dot) to unicycle state (x1, x2, heading, speed).
Vec unicycle_from_cartesian(const Vec& c);
Vec cartesian_from_unicycle(const Vec& s);

/// Scripted maneuver: PWL braking through the linearization while the speed is
/// above the cutoff, then stop, turn to the goal and drive to it at low speed.
/// x0 and xf are Cartesian. Violation is leaving either axis profile.
MissionResult unicycle_mission(const UnicycleParams& p, const AxisProfile& px, const AxisProfile& py,
                               const Vec& x0, const Vec& xf, const MissionOptions& opts = {});

struct PdGains {
  double kp = 4.0;
  double kd = 4.0;
};

/// PD regulation of the linearized unicycle (two double integrators, inputs
/// clipped to v_max) from Cartesian x0 to xf; violations recorded per axis profile.
Trajectory unicycle_pd_baseline(const UnicycleParams& p, const AxisProfile& px, const AxisProfile& py,
                                const Vec& x0, const Vec& xf, double horizon, double dt = 1e-3,
                                const PdGains& gains = {});

/// Obstacle positions (x, y) with linear interpolation; clamped outside the stamps.
struct ObstacleTrace {
  std::vector<double> t;
  std::vector<Vec> pos;

  void validate() const;
  Vec at(double time) const;
  /// Finite difference of the last two samples stamped at or before `time`.
  Vec velocity(double time) const;

  static ObstacleTrace sample(const std::function<Vec(double)>& path, double rate, double duration);
};

/// Planar ego reference.
struct Reference {
  std::function<Vec(double)> pos;
  std::function<Vec(double)> vel;
};

/// amplitude sin(2 pi freq (t - delay)) along `axis` (0 = x, 1 = y), zero on the other.
Reference sinusoid_reference(int axis, double amplitude, double freq, double delay);

struct AvoidanceOptions {
  double safety_radius = 0.64;
  double slack = 0.2;           // kept beyond the safety radius when shrinking
  double release_margin = 0.3;  // hysteresis before restoring the full bounds
  double rate = 70.0;           // replanning and control ticks per second
  double prediction = 1.0;      // constant-velocity look-ahead, s
  double horizon = 20.0;
  double filter_level = 0.98;   // PD is kept while the next-tick V stays below this
  bool replanning = true;
  PdGains gains;
};

struct AvoidanceResult {
  Trajectory trajectory;        // state (x, y, x_dot, y_dot), input (v1, v2)
  std::vector<double> distance; // ego-obstacle distance per sample
  double min_distance = 0.0;
  std::vector<double> rebuild_ms;
  double median_rebuild_ms = 0.0;
  int triggers = 0;
};

AvoidanceResult obstacle_avoidance_run(const QuadrotorParams& p, const Reference& ref,
                                       const ObstacleTrace& obstacle, const AvoidanceOptions& opts = {});

struct FeasibilityResult {
  bool feasible = true;
  std::optional<std::size_t> first_violation;
  int axis = -1;
};

/// Every sample (pos[a], vel[a]) must be Interior or Boundary of profiles[a].global_region().
FeasibilityResult reference_feasibility(const std::vector<AxisProfile>& profiles,
                                        const std::vector<Vec>& pos, const std::vector<Vec>& vel);

/// Circle of `radius` at `freq` Hz, `per_period` samples over one period.
void circle_reference(double radius, double freq, int per_period, std::vector<Vec>& pos,
                      std::vector<Vec>& vel);

}  // namespace ibckit
