#include "ibckit/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace ibckit {

bool Trajectory::any_violation() const { return first_violation().has_value(); }

std::optional<std::size_t> Trajectory::first_violation() const {
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].violation) return i;
  return std::nullopt;
}

Monitor region_monitor(const Polytope& region, double tol) {
  return Monitor{[region](const Vec& x) { return lyapunov_V(region, x); },
                 [region, tol](const Vec& x) { return contains(region, x, tol) == Location::kOutside; }};
}

Vec rk4_step(const Field& f, const Vec& x, const Vec& u, double dt) {
  const Vec k1 = f(x, u);
  const Vec k2 = f(x + 0.5 * dt * k1, u);
  const Vec k3 = f(x + 0.5 * dt * k2, u);
  const Vec k4 = f(x + dt * k3, u);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

Vec call_policy(const Policy& policy, double t, const Vec& x) {
  try {
    return policy(t, x);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kOutsideDomain) throw;
    throw Error(ErrorCode::kPolicyDomain,
                "policy undefined at t=" + std::to_string(t) + ", state " + format_vec(x));
  }
}

long step_count(double horizon, double dt) {
  return static_cast<long>(std::ceil(horizon / dt - 1e-9));
}

std::string time_tag(double t) { return "t=" + std::to_string(t); }

}  // namespace

Trajectory integrate(const Field& f, const Policy& policy, const Vec& x0, const IntegrateOptions& opts) {
  if (!(opts.dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
  if (!(opts.horizon >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "horizon must be nonnegative");
  Trajectory tr;
  tr.dt = opts.dt;
  auto push = [&](double t, const Vec& x, const Vec& u) {
    TrajectorySample s{t, x, u, 0.0, false};
    if (opts.monitor) {
      s.v = opts.monitor->level(x);
      s.violation = opts.monitor->violated(x);
    }
    tr.samples.push_back(std::move(s));
  };

  const long steps = step_count(opts.horizon, opts.dt);
  Vec x = x0;
  Vec u;
  for (long k = 0; k < steps; ++k) {
    const double t = opts.t0 + static_cast<double>(k) * opts.dt;
    u = call_policy(policy, t, x);
    push(t, x, u);
    x = rk4_step(f, x, u, opts.dt);
    const double t_next = opts.t0 + static_cast<double>(k + 1) * opts.dt;
    if (opts.stop && opts.stop(t_next, x)) {
      push(t_next, x, u);
      return tr;
    }
  }
  if (steps == 0) u = call_policy(policy, opts.t0, x);
  push(opts.t0 + static_cast<double>(steps) * opts.dt, x, u);
  return tr;
}

Field linear_field(const LinearSystem& sys) {
  return [sys](const Vec& x, const Vec& u) { return sys.field(x, u); };
}

namespace {

void require_interior(const Polytope& region, const Vec& x, const char* what) {
  if (contains(region, x) != Location::kInterior)
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " " + format_vec(x) +
                                                 " is not interior to the region");
}

// Appends `b` to `a`; the shared first sample of `b` replaces the last of `a`.
void splice(Trajectory& a, Trajectory&& b) {
  if (!a.samples.empty() && !b.samples.empty()) a.samples.pop_back();
  for (auto& s : b.samples) a.samples.push_back(std::move(s));
}

}  // namespace

SteerResult safe_steer(const LinearSystem& sys, const Polytope& region, const PwlController& ctrl,
                       const Vec& x0, const Vec& xf, double tf, const SteerOptions& opts) {
  require_interior(region, x0, "initial state");
  require_interior(region, xf, "target state");
  if (!(tf > 0.0)) throw Error(ErrorCode::kInvalidArgument, "horizon must be positive");
  const Mat basis = equilibrium_set(sys);
  const Field f = linear_field(sys);
  const Monitor mon = region_monitor(region);

  SteerResult out;
  IntegrateOptions p1;
  p1.dt = opts.dt;
  p1.monitor = mon;
  if (distance_to_equilibria(basis, x0) <= opts.switch_distance) {
    p1.horizon = 0.0;
    out.trajectory = integrate(f, [&](double, const Vec&) { return Vec::Zero(sys.m()); }, x0, p1);
  } else {
    p1.horizon = 0.5 * tf;
    p1.stop = [&](double, const Vec& x) { return distance_to_equilibria(basis, x) <= opts.switch_distance; };
    // Integration error may leave V a few ulps above 1 on the boundary.
    out.trajectory = integrate(f, [&](double, const Vec& x) { return ctrl.eval(x, 1e-7); }, x0, p1);
  }
  out.switch_time = out.trajectory.samples.back().t;
  const Vec xs = out.trajectory.samples.back().x;

  const double remaining = tf - out.switch_time;
  const GramianSteering gs(sys, xs, xf, remaining);
  IntegrateOptions p2;
  p2.dt = opts.dt;
  p2.t0 = out.switch_time;
  p2.horizon = remaining;
  p2.monitor = mon;
  const double ts = out.switch_time;
  const double dt = opts.dt;
  splice(out.trajectory,
         integrate(f, [&](double t, const Vec&) { return gs.held_input(t - ts, dt); }, xs, p2));
  out.trajectory.dt = opts.dt;
  out.trajectory.policy = "pwl+gramian";

  if (const auto k = out.trajectory.first_violation()) {
    const auto& s = out.trajectory.samples[*k];
    throw Error(ErrorCode::kSteeringFailed, "left the region at sample " + std::to_string(*k) + " (" +
                                                time_tag(s.t) + ", state " + format_vec(s.x) + ")");
  }
  out.endpoint_error = (out.trajectory.final_state() - xf).norm();
  return out;
}

SteerResult gramian_run(const LinearSystem& sys, const Polytope& region, const Vec& x0,
                        const Vec& xf, double tf, double dt) {
  const GramianSteering gs(sys, x0, xf, tf);
  IntegrateOptions o;
  o.dt = dt;
  o.horizon = tf;
  o.monitor = region_monitor(region);
  SteerResult out;
  out.trajectory =
      integrate(linear_field(sys), [&](double t, const Vec&) { return gs.held_input(t, dt); }, x0, o);
  out.trajectory.policy = "gramian";
  out.endpoint_error = (out.trajectory.final_state() - xf).norm();
  return out;
}

Vec unicycle_from_cartesian(const Vec& c) {
  Vec s(4);
  const double speed = std::hypot(c[2], c[3]);
  s << c[0], c[1], speed > 0.0 ? std::atan2(c[3], c[2]) : 0.0, speed;
  return s;
}

Vec cartesian_from_unicycle(const Vec& s) {
  Vec c(4);
  c << s[0], s[1], s[3] * std::cos(s[2]), s[3] * std::sin(s[2]);
  return c;
}

namespace {

Monitor axis_monitor(const AxisProfile& px, const AxisProfile& py, bool unicycle_state) {
  auto cart = [unicycle_state](const Vec& x) { return unicycle_state ? cartesian_from_unicycle(x) : x; };
  return Monitor{[&px, &py, cart](const Vec& x) {
                   const Vec c = cart(x);
                   return std::max(px.level(c[0], c[2]), py.level(c[1], c[3]));
                 },
                 [&px, &py, cart](const Vec& x) {
                   const Vec c = cart(x);
                   return px.classify(c[0], c[2]) == Location::kOutside ||
                          py.classify(c[1], c[3]) == Location::kOutside;
                 }};
}

double clamp_abs(double v, double limit) { return std::clamp(v, -limit, limit); }

}  // namespace

MissionResult unicycle_mission(const UnicycleParams& p, const AxisProfile& px, const AxisProfile& py,
                               const Vec& x0, const Vec& xf, const MissionOptions& opts) {
  if (x0.size() != 4 || xf.size() != 4)
    throw Error(ErrorCode::kInvalidArgument, "mission states are (x1, x2, x1_dot, x2_dot)");
  if (px.classify(x0[0], x0[2]) == Location::kOutside || py.classify(x0[1], x0[3]) == Location::kOutside)
    throw Error(ErrorCode::kInvalidArgument, "initial state is outside the axis profiles");
  if (px.classify(xf[0], xf[2]) == Location::kOutside || py.classify(xf[1], xf[3]) == Location::kOutside)
    throw Error(ErrorCode::kInvalidArgument, "target state is outside the axis profiles");

  enum class Phase { kBrake, kStop, kTurn, kDrive, kDone };
  static constexpr const char* kNames[] = {"brake", "stop", "turn", "drive", "done"};
  Phase phase = Phase::kBrake;
  double heading_goal = 0.0;
  MissionResult out;
  auto enter = [&](Phase next, double t) {
    phase = next;
    out.phases.emplace_back(kNames[static_cast<int>(next)], t);
  };
  out.phases.emplace_back(kNames[0], 0.0);

  const Policy policy = [&](double t, const Vec& s) -> Vec {
    Vec u = Vec::Zero(2);
    const double dx = xf[0] - s[0];
    const double dy = xf[1] - s[1];
    if (phase == Phase::kBrake) {
      if (std::abs(s[3]) >= p.speed_cutoff) {
        const Vec c = cartesian_from_unicycle(s);
        Vec v(2);
        v << px.control(c[0], c[2], 1e-7), py.control(c[1], c[3], 1e-7);
        return unicycle_fblin(p, s, v);
      }
      enter(Phase::kStop, t);
    }
    if (phase == Phase::kStop) {
      if (std::abs(s[3]) > opts.stop_speed) {
        u[0] = -clamp_abs(opts.gain * s[3], p.u1_max);
        return u;
      }
      heading_goal = std::atan2(dy, dx);
      enter(std::hypot(dx, dy) <= opts.done_tol ? Phase::kDrive : Phase::kTurn, t);
    }
    if (phase == Phase::kTurn) {
      const double err = std::remainder(heading_goal - s[2], 2.0 * std::numbers::pi);
      if (std::abs(err) > opts.heading_tol) {
        u[1] = clamp_abs(opts.gain * err, p.u2_max);
        return u;
      }
      enter(Phase::kDrive, t);
    }
    if (phase == Phase::kDrive) {
      const double along = dx * std::cos(s[2]) + dy * std::sin(s[2]);
      if (std::abs(along) > opts.done_tol || std::abs(s[3]) > opts.done_tol) {
        const double d = std::abs(along);
        const double v_des = std::copysign(
            std::min({p.speed_cutoff, std::sqrt(2.0 * opts.approach_decel * d), opts.approach_gain * d}),
            along);
        u[0] = clamp_abs(opts.gain * (v_des - s[3]), p.u1_max);
        return u;
      }
      enter(Phase::kDone, t);
    }
    u[0] = -clamp_abs(opts.gain * s[3], p.u1_max);
    return u;
  };

  IntegrateOptions o;
  o.dt = opts.dt;
  o.horizon = opts.horizon;
  o.monitor = axis_monitor(px, py, true);
  o.stop = [&](double, const Vec&) { return phase == Phase::kDone; };
  out.trajectory = integrate([](const Vec& x, const Vec& u) { return unicycle_dynamics(x, u); }, policy,
                             unicycle_from_cartesian(x0), o);
  out.trajectory.policy = "unicycle-mission";

  auto phase_at = [&](double t) {
    std::string name = out.phases.front().first;
    for (const auto& [n, start] : out.phases)
      if (start <= t) name = n;
    return name;
  };
  if (const auto k = out.trajectory.first_violation()) {
    const auto& s = out.trajectory.samples[*k];
    throw Error(ErrorCode::kSteeringFailed, "phase " + phase_at(s.t) + ": left the safe profile at sample " +
                                                std::to_string(*k) + " (" + time_tag(s.t) + ")");
  }
  if (phase != Phase::kDone)
    throw Error(ErrorCode::kSteeringFailed,
                "phase " + std::string(kNames[static_cast<int>(phase)]) + " unfinished at the horizon");
  const Vec& end = out.trajectory.final_state();
  out.position_error = std::hypot(end[0] - xf[0], end[1] - xf[1]);
  out.final_speed = std::abs(end[3]);
  if (out.position_error > opts.pos_tol || out.final_speed > opts.speed_tol)
    throw Error(ErrorCode::kSteeringFailed, "phase done: final position error " +
                                                std::to_string(out.position_error) + ", speed " +
                                                std::to_string(out.final_speed));
  return out;
}

Trajectory unicycle_pd_baseline(const UnicycleParams& p, const AxisProfile& px, const AxisProfile& py,
                                const Vec& x0, const Vec& xf, double horizon, double dt,
                                const PdGains& gains) {
  const Field f = [](const Vec& x, const Vec& v) {
    Vec d(4);
    d << x[2], x[3], v[0], v[1];
    return d;
  };
  const Policy pd = [&](double, const Vec& x) {
    Vec v(2);
    for (int a = 0; a < 2; ++a)
      v[a] = clamp_abs(gains.kp * (xf[a] - x[a]) + gains.kd * (xf[2 + a] - x[2 + a]), p.v_max);
    return v;
  };
  IntegrateOptions o;
  o.dt = dt;
  o.horizon = horizon;
  o.monitor = axis_monitor(px, py, false);
  Trajectory tr = integrate(f, pd, x0, o);
  tr.policy = "pd kp=" + std::to_string(gains.kp) + " kd=" + std::to_string(gains.kd);
  return tr;
}

void ObstacleTrace::validate() const {
  if (t.size() != pos.size() || t.size() < 2)
    throw Error(ErrorCode::kInvalidArgument, "obstacle trace needs at least two stamped positions");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1]))
      throw Error(ErrorCode::kInvalidArgument, "obstacle time stamps must increase (row " +
                                                   std::to_string(i) + ")");
}

Vec ObstacleTrace::at(double time) const {
  if (time <= t.front()) return pos.front();
  if (time >= t.back()) return pos.back();
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const std::size_t i = static_cast<std::size_t>(it - t.begin());
  const double w = (time - t[i - 1]) / (t[i] - t[i - 1]);
  return (1.0 - w) * pos[i - 1] + w * pos[i];
}

Vec ObstacleTrace::velocity(double time) const {
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  std::size_t i = static_cast<std::size_t>(it - t.begin());
  i = std::clamp<std::size_t>(i, 2, t.size()) - 1;
  return (pos[i] - pos[i - 1]) / (t[i] - t[i - 1]);
}

ObstacleTrace ObstacleTrace::sample(const std::function<Vec(double)>& path, double rate, double duration) {
  ObstacleTrace tr;
  const long n = static_cast<long>(std::floor(duration * rate + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double time = static_cast<double>(k) / rate;
    tr.t.push_back(time);
    tr.pos.push_back(path(time));
  }
  return tr;
}

Reference sinusoid_reference(int axis, double amplitude, double freq, double delay) {
  const double w = 2.0 * std::numbers::pi * freq;
  Reference r;
  r.pos = [=](double t) {
    Vec p = Vec::Zero(2);
    p[axis] = amplitude * std::sin(w * (t - delay));
    return p;
  };
  r.vel = [=](double t) {
    Vec v = Vec::Zero(2);
    v[axis] = amplitude * w * std::cos(w * (t - delay));
    return v;
  };
  return r;
}

namespace {

// min over s in [0, h] of |r + rv s|.
double min_distance_ahead(const Vec& r, const Vec& rv, double h) {
  const double vv = rv.squaredNorm();
  const double s = vv > 0.0 ? std::clamp(-r.dot(rv) / vv, 0.0, h) : 0.0;
  return (r + s * rv).norm();
}

struct Shrink {
  bool valid = false;
  double penetration = 0.0;
  AxisSpec spec;
  AxisProfile profile;
};

}  // namespace

AvoidanceResult obstacle_avoidance_run(const QuadrotorParams& p, const Reference& ref,
                                       const ObstacleTrace& obstacle, const AvoidanceOptions& opts) {
  obstacle.validate();
  if (!(opts.rate > 0.0) || !(opts.horizon > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "rate and horizon must be positive");
  if (obstacle.t.front() > 0.0 || obstacle.t.back() < opts.horizon)
    throw Error(ErrorCode::kInvalidArgument, "obstacle trace does not cover the horizon");

  const double h = 1.0 / opts.rate;
  const double clearance = opts.safety_radius + opts.slack;
  const AxisSpec base = quadrotor_axis_spec(p);
  const AxisProfile global = safe_speed_profile(base);
  std::vector<AxisProfile> active{global, global};
  int shrunk = -1;
  AvoidanceResult out;

  const Field plant = [&p](const Vec& x, const Vec& v) {
    return quad_planar_dynamics(p, x, quad_angle_map(p, v));
  };

  auto build = [&](int a, const Vec& x, const Vec& o, const Vec& vo, const AxisSpec* prev) {
    Shrink c;
    const double e = x[a];
    const double ev = x[2 + a];
    const double far = o[a] + vo[a] * opts.prediction;
    c.spec = base;
    if (e <= o[a]) {
      c.spec.pos_hi = std::min(base.pos_hi, std::min(o[a], far) - clearance);
      if (prev) c.spec.pos_hi = std::min(c.spec.pos_hi, prev->pos_hi);
    } else {
      c.spec.pos_lo = std::max(base.pos_lo, std::max(o[a], far) + clearance);
      if (prev) c.spec.pos_lo = std::max(c.spec.pos_lo, prev->pos_lo);
    }
    Vec r(1), rv(1);
    r << e - o[a];
    rv << ev - vo[a];
    c.penetration = clearance - min_distance_ahead(r, rv, opts.prediction);
    if (!(c.spec.pos_hi - c.spec.pos_lo > 1e-3)) return c;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.profile = safe_speed_profile(c.spec);
    } catch (const Error&) {
      return c;
    }
    out.rebuild_ms.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    c.valid = c.profile.classify(e, ev) == Location::kInterior;
    return c;
  };

  auto replan = [&](long tick, double t, const Vec& x) {
    const Vec o = obstacle.at(t);
    const Vec vo = obstacle.velocity(t);
    const double ahead = min_distance_ahead(x.head(2) - o, x.tail(2) - vo, opts.prediction);
    if (shrunk >= 0 && ahead > clearance + opts.release_margin &&
        global.classify(x[shrunk], x[2 + shrunk]) == Location::kInterior) {
      active[shrunk] = global;
      shrunk = -1;
      return;
    }
    if (shrunk < 0 && ahead >= clearance) return;

    if (shrunk >= 0) {
      Shrink keep = build(shrunk, x, o, vo, &active[shrunk].spec);
      if (keep.valid) {
        active[shrunk] = std::move(keep.profile);
        return;
      }
      const int other = 1 - shrunk;
      Shrink alt = build(other, x, o, vo, nullptr);
      if (alt.valid && global.classify(x[shrunk], x[2 + shrunk]) == Location::kInterior) {
        active[shrunk] = global;
        active[other] = std::move(alt.profile);
        shrunk = other;
        return;
      }
    } else {
      Shrink cx = build(0, x, o, vo, nullptr);
      Shrink cy = build(1, x, o, vo, nullptr);
      Shrink* pick = nullptr;
      if (cx.valid) pick = &cx;
      if (cy.valid && (!pick || cy.penetration > cx.penetration)) pick = &cy;
      if (pick) {
        shrunk = pick == &cx ? 0 : 1;
        active[shrunk] = std::move(pick->profile);
        ++out.triggers;
        return;
      }
    }
    throw Error(ErrorCode::kReplanInfeasible,
                "no shrunk region contains the state at tick " + std::to_string(tick) + " (" +
                    time_tag(t) + ", state " + format_vec(x) + ")");
  };

  auto control = [&](double t, const Vec& x) {
    const Vec rp = ref.pos(t);
    const Vec rv = ref.vel(t);
    Vec v(2);
    for (int a = 0; a < 2; ++a) {
      const double pos = x[a];
      const double vel = x[2 + a];
      const double pd =
          clamp_abs(opts.gains.kp * (rp[a] - pos) + opts.gains.kd * (rv[a] - vel), p.v_max);
      const double pos_next = pos + vel * h + 0.5 * pd * h * h;
      const double vel_next = vel + pd * h;
      v[a] = active[a].level(pos_next, vel_next) <= opts.filter_level ? pd
                                                                      : active[a].control(pos, vel, 1e-7);
    }
    return v;
  };

  auto record = [&](double t, const Vec& x, const Vec& v) {
    TrajectorySample s{t, x, v, 0.0, false};
    for (int a = 0; a < 2; ++a) {
      s.v = std::max(s.v, active[a].level(x[a], x[2 + a]));
      s.violation = s.violation || active[a].classify(x[a], x[2 + a]) == Location::kOutside;
    }
    out.trajectory.samples.push_back(std::move(s));
    out.distance.push_back((x.head(2) - obstacle.at(t)).norm());
  };

  Vec x(4);
  x << ref.pos(0.0), ref.vel(0.0);
  const long steps = step_count(opts.horizon, h);
  Vec v = Vec::Zero(2);
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    if (opts.replanning) replan(k, t, x);
    try {
      v = control(t, x);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kOutsideDomain) throw;
      throw Error(ErrorCode::kPolicyDomain, "tick " + std::to_string(k) + " (" + time_tag(t) +
                                                "): state " + format_vec(x) + " outside the profile");
    }
    record(t, x, v);
    x = rk4_step(plant, x, v, h);
  }
  record(static_cast<double>(steps) * h, x, v);

  out.trajectory.dt = h;
  out.trajectory.policy = opts.replanning ? "pd+profile-replanning" : "pd+profile";
  out.min_distance = *std::min_element(out.distance.begin(), out.distance.end());
  if (!out.rebuild_ms.empty()) {
    std::vector<double> sorted = out.rebuild_ms;
    const auto mid = sorted.begin() + static_cast<long>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    out.median_rebuild_ms = *mid;
  }
  return out;
}

FeasibilityResult reference_feasibility(const std::vector<AxisProfile>& profiles,
                                        const std::vector<Vec>& pos, const std::vector<Vec>& vel) {
  if (pos.size() != vel.size())
    throw Error(ErrorCode::kInvalidArgument, "position and velocity samples differ in count");
  FeasibilityResult r;
  for (std::size_t k = 0; k < pos.size(); ++k)
    for (std::size_t a = 0; a < profiles.size(); ++a)
      if (profiles[a].classify(pos[k][a], vel[k][a]) == Location::kOutside) {
        r.feasible = false;
        r.first_violation = k;
        r.axis = static_cast<int>(a);
        return r;
      }
  return r;
}

void circle_reference(double radius, double freq, int per_period, std::vector<Vec>& pos,
                      std::vector<Vec>& vel) {
  const double w = 2.0 * std::numbers::pi * freq;
  pos.clear();
  vel.clear();
  for (int k = 0; k < per_period; ++k) {
    const double t = static_cast<double>(k) / (per_period * freq);
    Vec p(2), v(2);
    p << radius * std::cos(w * t), radius * std::sin(w * t);
    v << -radius * w * std::sin(w * t), radius * w * std::cos(w * t);
    pos.push_back(p);
    vel.push_back(v);
  }
}

}  // namespace ibckit
