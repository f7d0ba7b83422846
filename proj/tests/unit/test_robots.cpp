#include "doctest.h"
#include "test_support.hpp"

#include "ibckit/robots.hpp"

#include <cmath>
#include <numbers>

using namespace ibckit;
using namespace ibckit::test;

TEST_CASE("arm linearization") {
  const ArmParams p;
  const Vec s = vec({std::numbers::pi / 2, 0.3});
  CHECK(arm_fblin(p, s, 5.0) == doctest::Approx(10.0));
  auto& g = rng();
  for (int k = 0; k < 100; ++k) {
    const Vec x = vec({uniform(g, -2, 2), uniform(g, -1, 1)});
    const double u = uniform(g, -5, 5);
    const Vec d = arm_dynamics(p, x, arm_fblin(p, x, u));
    CHECK(d[0] == x[1]);
    CHECK(std::abs(d[1] - u) <= 1e-12);
  }
}

TEST_CASE("unicycle linearization") {
  const UnicycleParams p;
  const Vec s = vec({0, 0, std::numbers::pi / 4, std::numbers::sqrt2});
  const Vec u = unicycle_fblin(p, s, vec({5, 5}));
  CHECK(u[0] == doctest::Approx(5 * std::numbers::sqrt2));
  CHECK(std::abs(u[1]) <= 1e-12);
  CHECK_THROWS_AS(unicycle_fblin(p, vec({0, 0, 0, 1.0}), vec({1, 1})), Error);

  // Cartesian acceleration d/dt (x4 cos x3, x4 sin x3) must equal v.
  auto& g = rng();
  for (int k = 0; k < 100; ++k) {
    const double speed = uniform(g, 1.5, 7) * (k % 2 ? 1 : -1);
    const Vec x = vec({0, 0, uniform(g, -3.1, 3.1), speed});
    const Vec v = vec({uniform(g, -5, 5), uniform(g, -5, 5)});
    const Vec in = unicycle_fblin(p, x, v);
    const Vec d = unicycle_dynamics(x, in);
    const double ax = d[3] * std::cos(x[2]) - x[3] * std::sin(x[2]) * d[2];
    const double ay = d[3] * std::sin(x[2]) + x[3] * std::cos(x[2]) * d[2];
    CHECK(std::abs(ax - v[0]) <= 1e-12 * 10);
    CHECK(std::abs(ay - v[1]) <= 1e-12 * 10);
  }
}

TEST_CASE("quadrotor angle map") {
  const QuadrotorParams p;
  const Vec a = quad_angle_map(p, vec({3.247, 0}));
  CHECK(a[0] == doctest::Approx(std::atan(3.247 / 9.81)));
  CHECK(a[0] == doctest::Approx(0.3198).epsilon(1e-3));
  CHECK(p.derived_v_bound() >= p.v_max);

  auto& g = rng();
  for (int k = 0; k < 200; ++k) {
    const Vec v = vec({uniform(g, -p.v_max, p.v_max), uniform(g, -p.v_max, p.v_max)});
    const Vec ang = quad_angle_map(p, v);
    CHECK(std::abs(ang[0]) <= p.angle_max);
    CHECK(std::abs(ang[1]) <= p.angle_max);
    const Vec d = quad_planar_dynamics(p, vec({0, 0, 0.1, -0.2}), ang);
    CHECK(std::abs(d[2] - v[0]) <= 1e-12);
    CHECK(std::abs(d[3] - v[1]) <= 1e-12);

    // Full thrust model with altitude held: R (0, 0, f) - (0, 0, g) at zero yaw.
    const Mat r = rotation_zyx(0, ang[0], ang[1]);
    CHECK((r.transpose() * r - Mat::Identity(3, 3)).norm() <= 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0));
    const double f = p.gravity / (std::cos(ang[0]) * std::cos(ang[1]));
    const Vec acc = r.col(2) * f - vec({0, 0, p.gravity});
    CHECK(std::abs(acc[0] - d[2]) <= 1e-12);
    CHECK(std::abs(acc[1] - d[3]) <= 1e-12);
    CHECK(std::abs(acc[2]) <= 1e-12);
  }
}

TEST_CASE("rotation composition order") {
  const double c = std::cos(0.3), s = std::sin(0.3);
  CHECK((rotation_zyx(0.3, 0, 0) - mat({{c, -s, 0}, {s, c, 0}, {0, 0, 1}})).norm() <= 1e-15);
  CHECK((rotation_zyx(0, 0.3, 0) - mat({{c, 0, s}, {0, 1, 0}, {-s, 0, c}})).norm() <= 1e-15);
  CHECK((rotation_zyx(0, 0, 0.3) - mat({{1, 0, 0}, {0, c, -s}, {0, s, c}})).norm() <= 1e-15);
  const Mat r = rotation_zyx(0.1, 0.2, 0.3);
  CHECK((r - rotation_zyx(0.1, 0, 0) * rotation_zyx(0, 0.2, 0) * rotation_zyx(0, 0, 0.3)).norm() <=
        1e-15);
}

TEST_CASE("arm profile") {
  const AxisProfile a = safe_speed_profile(arm_axis_spec(5.0));
  CHECK(a.lambda == 1.0);
  CHECK(a.half_width == doctest::Approx(5 * std::numbers::pi / 12));
  CHECK(a.region.vertices().size() == 6);
  CHECK(has_point(a.region.vertices(), vec({std::numbers::pi / 2, 0})));
  CHECK(a.min_margin > kTolLp);

  // Strict margin at (5 pi / 12, lambda) under |u| <= 3 needs lambda^2 < pi / 4.
  const AxisProfile b = safe_speed_profile(arm_axis_spec(3.0));
  double oracle = 0;
  for (int k = 20; k >= 1; --k)
    if ((k / 20.0) * (k / 20.0) < std::numbers::pi / 4 - 1e-6) {
      oracle = k / 20.0;
      break;
    }
  CHECK(b.lambda == doctest::Approx(oracle));
}

TEST_CASE("unicycle profile margin") {
  const AxisProfile a = safe_speed_profile(unicycle_axis_spec());
  CHECK(a.half_width == doctest::Approx(20));
  CHECK(a.lambda == 1.0);
  // Binding facet (20, 7) -> (30, 0), normal (7, 10) / |(7, 10)|, braking input -5.
  CHECK(a.min_margin == doctest::Approx(1.0 / std::sqrt(149.0)).epsilon(1e-6));
}

TEST_CASE("quadrotor profile width rule") {
  const AxisProfile a = safe_speed_profile(quadrotor_axis_spec());
  const double xb = 2.0 - kHalfWidthMargin * 4.0 / 3.247;
  CHECK(a.half_width == doctest::Approx(xb));
  CHECK(a.lambda == 1.0);
  CHECK(a.min_margin > kTolLp);
}

TEST_CASE("profile soundness on asymmetric bounds") {
  AxisSpec s;
  s.pos_lo = -2.0;
  s.pos_hi = -0.84;
  s.vel_lo = -2.0;
  s.vel_hi = 2.0;
  s.input_lo = -3.247;
  s.input_hi = 3.247;
  const AxisProfile a = safe_speed_profile(s);
  CHECK(a.center == doctest::Approx(-1.42));
  CHECK(a.lambda < 1.0);

  auto& g = rng();
  const Polytope global = a.global_region();
  for (int k = 0; k < 300; ++k) {
    const Vec p = sample_inside(g, global);
    CHECK(p[0] >= s.pos_lo - 1e-9);
    CHECK(p[0] <= s.pos_hi + 1e-9);
    CHECK(std::abs(p[1]) <= 2.0 + 1e-9);
    const double u = a.control(p[0], p[1]);
    CHECK(u >= s.input_lo - 1e-9);
    CHECK(u <= s.input_hi + 1e-9);
    CHECK(a.classify(p[0], p[1]) != Location::kOutside);
  }
}

TEST_CASE("profile argument validation") {
  AxisSpec s = quadrotor_axis_spec();
  s.alpha = 1.0;
  CHECK_THROWS_AS(safe_speed_profile(s), Error);
  s = quadrotor_axis_spec();
  s.vel_lo = 0.5;
  CHECK_THROWS_AS(safe_speed_profile(s), Error);
  s = quadrotor_axis_spec();
  s.pbox_half_width = 3.0;
  CHECK_THROWS_AS(safe_speed_profile(s), Error);
}
