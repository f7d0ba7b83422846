#include "doctest.h"
#include "test_support.hpp"

#include "ibckit/linalg.hpp"
#include "ibckit/pwl.hpp"

#include <cmath>

using namespace ibckit;
using namespace ibckit::test;

namespace {

// Independent RK4 of the double integrator under a feedback.
template <class Policy>
Vec rk4_step(const LinearSystem& s, const Vec& x, double dt, Policy&& u) {
  const Vec uu = u(x);
  const Vec k1 = s.field(x, uu);
  const Vec k2 = s.field(x + 0.5 * dt * k1, uu);
  const Vec k3 = s.field(x + 0.5 * dt * k2, uu);
  const Vec k4 = s.field(x + dt * k3, uu);
  return x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace

TEST_CASE("vertex control assignment") {
  const auto sys = double_integrator();
  const Polytope x = hexagon();
  const auto controls = assign_vertex_controls(sys, x, InputSet{});
  for (std::size_t i = 0; i < x.vertices().size(); ++i) {
    const Vec& v = x.vertices()[i];
    if (v[1] == 0.0) {
      CHECK(controls[i].norm() == 0.0);
    } else {
      // Both active facets strictly inward.
      for (const auto& h : tangent_cone(x, v).normals) CHECK(h.dot(sys.field(v, controls[i])) < 0);
    }
  }
  const int top = x.find_vertex(vec({0.8, 1}));
  CHECK(controls[top][0] < -5.0);

  const InputSet tight = InputSet::box(vec({-1}), vec({1}));
  CHECK_THROWS_AS(assign_vertex_controls(sys, x, tight), Error);
  CHECK_THROWS_AS(assign_vertex_controls(sys, box_p(), InputSet{}), Error);
}

TEST_CASE("controller interpolates vertex controls and is continuous") {
  const auto sys = double_integrator();
  const Polytope x = hexagon();
  const PwlController c = build_pwl(sys, x, InputSet{});
  CHECK(c.gains().size() == 6);
  CHECK(c.eval(Vec::Zero(2)).norm() == 0.0);
  const auto& tri = c.triangulation();
  for (std::size_t i = 0; i < tri.points.size(); ++i)
    CHECK((c.eval(tri.points[i]) - c.point_controls()[i]).norm() < 1e-9);

  // Shared edges are the rays 0 -> v; evaluate each gain that contains the ray.
  for (std::size_t i = 0; i + 1 < tri.points.size(); ++i) {
    const Vec& v = tri.points[i];
    for (int k = 1; k <= 20; ++k) {
      const Vec p = (k / 20.0) * v;
      std::vector<Vec> vals;
      for (std::size_t s = 0; s < tri.simplices.size(); ++s) {
        const auto& simplex = tri.simplices[s];
        if (std::find(simplex.begin(), simplex.end(), static_cast<int>(i)) != simplex.end())
          vals.push_back(c.gains()[s] * p);
      }
      CHECK(vals.size() == 2);
      CHECK((vals[0] - vals[1]).norm() < 1e-8);
    }
  }

  const Vec v = vec({0.8, 1});
  CHECK((c.eval(0.5 * v) - 0.5 * c.eval(v)).norm() < 1e-12);
  CHECK_THROWS_AS(c.eval(vec({1.01, 0})), Error);
}

TEST_CASE("ray linearity on random states") {
  auto& g = rng();
  const auto sys = double_integrator();
  const Polytope x = hexagon();
  const PwlController c = build_pwl(sys, x, InputSet{});
  for (int k = 0; k < 200; ++k) {
    const Vec p = sample_inside(g, x);
    const double lambda = uniform(g, 0.01, 1.0);
    CHECK((c.eval(lambda * p) - lambda * c.eval(p)).norm() <= 1e-9 * (1 + c.eval(p).norm()));
  }
}

TEST_CASE("Lyapunov function levels") {
  const Polytope x = hexagon();
  CHECK(lyapunov_V(x, vec({1, 0})) == doctest::Approx(1));
  CHECK(lyapunov_V(x, vec({0, 1})) == doctest::Approx(1));
  CHECK(lyapunov_V(x, 0.4 * vec({0.9, 0.5})) == doctest::Approx(0.4));
  CHECK(lyapunov_V(x, Vec::Zero(2)) == 0.0);

  const auto sys = double_integrator();
  const PwlController c = build_pwl(sys, x, InputSet{});
  CHECK(dini_derivative(sys, c, x, vec({1, 0})) == doctest::Approx(0.0));
}

TEST_CASE("Dini derivative is nonpositive and negative away from equilibria") {
  auto& g = rng();
  const auto sys = double_integrator();
  const Polytope x = hexagon();
  const PwlController c = build_pwl(sys, x, InputSet{});
  const Mat o = equilibrium_set(sys);
  for (int k = 0; k < 200; ++k) {
    const Vec p = sample_inside(g, x);
    const double d = dini_derivative(sys, c, x, p);
    CHECK(d <= kTolAct);
    if (distance_to_equilibria(o, p) > 0.05) CHECK(d <= -1e-3);
  }
}

TEST_CASE("closed loop stays inside and approaches equilibria") {
  auto& g = rng();
  const auto sys = double_integrator();
  const Polytope x = hexagon();
  const PwlController c = build_pwl(sys, x, InputSet{});
  const Mat o = equilibrium_set(sys);
  for (int run = 0; run < 5; ++run) {
    Vec s = sample_inside(g, x);
    double v_prev = lyapunov_V(x, s);
    for (int k = 0; k < 30000; ++k) {
      s = rk4_step(sys, s, 1e-3, [&](const Vec& z) { return c.eval(z, 1e-7); });
      const double v = lyapunov_V(x, s);
      REQUIRE(v <= v_prev + 1e-6);
      v_prev = v;
    }
    CHECK(contains(x, s) != Location::kOutside);
    CHECK(distance_to_equilibria(o, s) <= 0.05);
  }
}

TEST_CASE("Gramian steering") {
  const auto sys = double_integrator();
  const GramianSteering zero(sys, Vec::Zero(2), Vec::Zero(2), 3.0);
  CHECK(zero.input(1.0).norm() == 0.0);

  // Closed-form Gramian of the double integrator: [[t^3/3, t^2/2], [t^2/2, t]].
  const double tf = 2.0;
  const GramianSteering gs(sys, vec({1, 0}), Vec::Zero(2), tf);
  const Mat w = mat({{tf * tf * tf / 3, tf * tf / 2}, {tf * tf / 2, tf}});
  CHECK((gs.gramian() - w).norm() < 1e-10);

  Vec s = vec({1, 0});
  const double dt = 1e-3;
  for (int k = 0; k < 2000; ++k) {
    const double t = k * dt;
    s = rk4_step(sys, s, dt, [&](const Vec&) { return gs.held_input(t, dt); });
  }
  CHECK(s.norm() <= 1e-3);

  const LinearSystem bad(Mat::Identity(2, 2), mat({{1}, {0}}));
  CHECK_THROWS_AS(GramianSteering(bad, vec({1, 0}), Vec::Zero(2), 1.0), Error);
}
