#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rjf/dynamics.hpp"

using namespace rjf;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ProblemPtr euclidean_free(std::optional<HypersurfaceSpec> surf = {}) {
  Problem pr;
  pr.geom = make_chart_euclidean(2);
  pr.surface = std::move(surf);
  pr.potential = make_potential_zero();
  return std::make_shared<const Problem>(std::move(pr));
}

// strip between the walls x1 = 0 and x1 = 1, trajectory inside
HypersurfaceSpec strip_walls() {
  Polynomial rho;
  rho.dim = 2;
  rho.terms = {{1.0, {1, 0}}, {-1.0, {2, 0}}};  // x1 - x1^2
  auto s = make_surface_polynomial(rho, +1);
  s.boundary = true;
  return s;
}

ProblemPtr harmonic_problem() {
  Problem pr;
  pr.geom = make_chart_euclidean(2);
  pr.potential = make_potential_harmonic(1.0);
  return std::make_shared<const Problem>(std::move(pr));
}

ProblemPtr sphere_problem() {
  Problem pr;
  pr.geom = make_chart_sphere_polar();
  pr.potential = make_potential_zero();
  return std::make_shared<const Problem>(std::move(pr));
}

ProblemPtr disk_problem() {
  Problem pr;
  pr.geom = make_chart_euclidean(2);
  pr.surface = make_surface_sphere_level(2, 1.0, +1);
  pr.surface->boundary = true;
  pr.potential = make_potential_zero();
  return std::make_shared<const Problem>(std::move(pr));
}

}  // namespace

TEST_CASE("straight line crosses a flat wall at the expected time") {
  auto pr = euclidean_free(make_surface_hyperplane(2, 0.0, +1));
  EventPolicy policy;
  const auto path = shoot(pr, v2(1.0, 0.0), v2(-1.0, 0.0), 2.0, policy);
  REQUIRE(path.events.size() == 1);
  CHECK(path.events[0].time == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(path.events[0].point.norm() < 1e-9);
  CHECK((path.events[0].v_out - v2(1.0, 0.0)).norm() < 1e-10);
}

TEST_CASE("harmonic oscillator matches the closed form, no wall contact") {
  Problem raw;
  raw.geom = make_chart_euclidean(2);
  raw.surface = make_surface_hyperplane(2, -2.0, +1);
  raw.potential = make_potential_harmonic(1.0);
  auto pr = std::make_shared<const Problem>(std::move(raw));
  EventPolicy policy;
  const auto path = shoot(pr, v2(1.0, 0.0), v2(0.0, 0.0), M_PI, policy);
  CHECK(path.events.empty());
  for (double t : {0.3, 1.0, 2.2, 3.0}) {
    CHECK((path.position(t) - v2(std::cos(t), 0.0)).norm() < 1e-8);
    CHECK((path.velocity(t) - v2(-std::sin(t), 0.0)).norm() < 1e-8);
  }
}

TEST_CASE("great circle keeps unit speed on the sphere chart") {
  auto pr = sphere_problem();
  EventPolicy policy;
  const auto path = shoot(pr, v2(M_PI / 2, 0.0), v2(0.0, 1.0), 3.0, policy);
  CHECK(path.events.empty());
  for (double t : {0.5, 1.5, 2.5, 3.0}) {
    const Vec x = path.position(t), v = path.velocity(t);
    CHECK(std::abs(g_norm(pr->geom, x, v) - 1.0) < 1e-9);
    CHECK(std::abs(x[0] - M_PI / 2) < 1e-9);
  }
}

TEST_CASE("velocity reflection") {
  auto pr = euclidean_free();
  const auto wall = make_surface_hyperplane(2, 0.0, +1);
  SUBCASE("flat wall") {
    const Vec out = reflect_velocity(pr->geom, wall, v2(0.0, 0.5), v2(-2.0, 3.0));
    CHECK((out - v2(2.0, 3.0)).norm() < 1e-14);
  }
  SUBCASE("normal incidence flips") {
    const Vec out = reflect_velocity(pr->geom, wall, v2(0.0, 0.0), v2(-3.0, 0.0));
    CHECK((out - v2(3.0, 0.0)).norm() < 1e-14);
  }
  SUBCASE("unit circle boundary at the top") {
    const auto circle = make_surface_sphere_level(2, 1.0, +1);
    const Vec out = reflect_velocity(pr->geom, circle, v2(0.0, 1.0), v2(1.0, -1.0));
    CHECK((out - v2(1.0, 1.0)).norm() < 1e-12);
  }
  SUBCASE("g-norm preserved") {
    const auto circle = make_surface_sphere_level(2, 1.0, +1);
    const Vec vin = v2(0.3, -1.7);
    const Vec out = reflect_velocity(pr->geom, circle, v2(0.0, 1.0), vin);
    CHECK(std::abs(out.norm() - vin.norm()) < 1e-12);
  }
  SUBCASE("tangency rejected") {
    CHECK_THROWS_AS(reflect_velocity(pr->geom, wall, v2(0.0, 0.0), v2(1e-9, 1.0)), Error);
  }
}

TEST_CASE("strip billiard: two bounces return to the start") {
  Problem raw;
  raw.geom = make_chart_euclidean(2);
  raw.surface = strip_walls();
  raw.potential = make_potential_zero();
  auto pr = std::make_shared<const Problem>(std::move(raw));
  EventPolicy policy;  // AlwaysReflect
  const auto path = shoot(pr, v2(0.5, 0.0), v2(1.0, 0.0), 2.0, policy);
  REQUIRE(path.events.size() == 2);
  CHECK(path.events[0].time == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(path.events[1].time == doctest::Approx(1.5).epsilon(1e-10));
  CHECK((path.position(2.0) - v2(0.5, 0.0)).norm() < 1e-9);
  const auto d = diagnose(path);
  CHECK(d.energy_drift < 1e-7);
  CHECK(d.max_reflection_defect < 1e-8);
  CHECK(d.max_position_gap < 1e-9);
}

TEST_CASE("transmission is recorded as a kink and leaves the line straight") {
  auto pr = euclidean_free(make_surface_hyperplane(2, 0.0, +1));
  EventPolicy policy;
  policy.decisions = {Decision::Transmit};
  const auto path = shoot(pr, v2(1.0, 0.2), v2(-1.0, 0.0), 2.0, policy);
  REQUIRE(path.events.size() == 1);
  CHECK(path.events[0].kind == EventKind::Kink);
  CHECK((path.events[0].v_in - path.events[0].v_out).norm() == 0.0);
  CHECK((path.position(2.0) - v2(-1.0, 0.2)).norm() < 1e-9);
  const auto d = diagnose(path);
  CHECK(d.max_kink_defect < 1e-12);
}

TEST_CASE("transmission through a declared boundary is rejected") {
  auto surf = make_surface_hyperplane(2, 0.0, +1);
  surf.boundary = true;
  auto pr = euclidean_free(std::move(surf));
  EventPolicy policy;
  policy.decisions = {Decision::Transmit};
  CHECK_THROWS_AS(shoot(pr, v2(1.0, 0.0), v2(-1.0, 0.0), 2.0, policy), Error);
}

TEST_CASE("policy exhaustion under ErrorOnExtra") {
  auto pr = euclidean_free(make_surface_hyperplane(2, 0.0, +1));
  EventPolicy policy;
  policy.overflow = Overflow::ErrorOnExtra;
  CHECK_THROWS_AS(shoot(pr, v2(1.0, 0.0), v2(-1.0, 0.0), 2.0, policy), Error);
}

TEST_CASE("action values") {
  EventPolicy policy;
  SUBCASE("free straight segment: L^2 / 2T") {
    auto pr = euclidean_free();
    const auto path = shoot(pr, v2(0.0, 0.0), v2(0.6, 0.8), 2.0, policy);
    // length 2, time 2
    CHECK(action(path) == doctest::Approx(4.0 / 4.0).epsilon(1e-10));
  }
  SUBCASE("strip two-bounce path at unit speed: J = T/2") {
    Problem raw;
    raw.geom = make_chart_euclidean(2);
    raw.surface = strip_walls();
    raw.potential = make_potential_zero();
    auto pr = std::make_shared<const Problem>(std::move(raw));
    const auto path = shoot(pr, v2(0.5, 0.0), v2(1.0, 0.0), 2.0, policy);
    CHECK(action(path) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("harmonic oscillator over a full arch integrates to zero") {
    auto pr = harmonic_problem();
    const auto path = shoot(pr, v2(1.0, 0.0), v2(0.0, 0.0), M_PI, policy);
    CHECK(std::abs(action(path)) < 1e-9);
  }
}

TEST_CASE("criticality residual") {
  Problem raw;
  raw.geom = make_chart_euclidean(2);
  raw.surface = strip_walls();
  raw.potential = make_potential_zero();
  auto pr = std::make_shared<const Problem>(std::move(raw));
  EventPolicy policy;
  const auto path = shoot(pr, v2(0.5, 0.0), v2(1.0, 0.35), 2.0, policy);

  Rng rng(23);
  std::vector<ProbeField> probes;
  for (int i = 0; i < 20; ++i)
    probes.push_back(make_admissible_probe(path, rng.uniform_vec(2, -1.0, 1.0),
                                           rng.uniform_vec(2, -1.0, 1.0)));

  SUBCASE("physical path: residual below 1e-6") {
    CHECK(criticality_residual(path, probes) < 1e-6);
  }
  SUBCASE("zero probe gives zero") {
    std::vector<ProbeField> zero = {make_admissible_probe(path, v2(0, 0), v2(0, 0))};
    CHECK(criticality_residual(path, zero) == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("corrupted reflection is detected") {
    ShootOptions opts;
    opts.reflect_scale = 1.1;
    opts.reflect_scale_event = 0;
    const auto bad = shoot(pr, v2(0.5, 0.0), v2(1.0, 0.35), 2.0, policy, opts);
    std::vector<ProbeField> bad_probes;
    Rng rng2(29);
    for (int i = 0; i < 20; ++i)
      bad_probes.push_back(make_admissible_probe(bad, rng2.uniform_vec(2, -1.0, 1.0),
                                                 rng2.uniform_vec(2, -1.0, 1.0)));
    CHECK(criticality_residual(bad, bad_probes) > 1e-2);
  }
}

TEST_CASE("energy conservation and time reversal") {
  auto pr = disk_problem();
  EventPolicy policy;
  const Vec x0 = v2(-0.55, 0.2);
  Vec v0 = v2(0.9, 0.35);
  v0.normalize();
  const double T = 7.5;
  const auto path = shoot(pr, x0, v0, T, policy);
  CHECK(path.events.size() >= 3);
  CHECK(diagnose(path).energy_drift < 1e-7);

  const auto back = shoot(pr, path.position(T), Vec(-path.velocity(T)), T, policy);
  CHECK((back.position(T) - x0).norm() < 1e-7);
  CHECK((back.velocity(T) + v0).norm() < 1e-7);
}

TEST_CASE("shoot depends continuously on the initial data") {
  auto pr = disk_problem();
  EventPolicy policy;
  const Vec x0 = v2(-0.55, 0.2);
  Vec v0 = v2(0.9, 0.35);
  v0.normalize();
  const double T = 4.0;
  const auto base = shoot(pr, x0, v0, T, policy);
  double prev_ratio = 0.0;
  for (double eps : {1e-3, 1e-4, 1e-5}) {
    const auto varied = shoot(pr, v2(x0[0] + eps, x0[1]), v0, T, policy);
    const double disp = (varied.position(T) - base.position(T)).norm();
    const double c = disp / eps;
    CHECK(c < 50.0);  // bounded sensitivity constant
    if (prev_ratio > 0) CHECK(std::abs(c / prev_ratio - 1.0) < 0.2);
    prev_ratio = c;
  }
}

TEST_CASE("two-point solve") {
  EventPolicy policy;
  SUBCASE("free particle straight line") {
    auto pr = euclidean_free();
    const auto path =
        two_point_solve(pr, v2(0.0, 0.0), v2(1.0, 1.0), v2(0.8, 1.3), 1.0, policy);
    CHECK((path.velocity(0.0) - v2(1.0, 1.0)).norm() < 1e-9);
    CHECK((path.position(1.0) - v2(1.0, 1.0)).norm() < 1e-10);
  }
  SUBCASE("one-bounce strip path matches the unfolded straight line") {
    Problem raw;
    raw.geom = make_chart_euclidean(2);
    raw.surface = strip_walls();
    raw.potential = make_potential_zero();
    auto pr = std::make_shared<const Problem>(std::move(raw));
    // from (0.5, 0) to (0.5, 0.8) in time 1 with one bounce off x1=1:
    // unfolding: target mirror image at (1.5, 0.8), distance sqrt(1+0.64)
    const Vec x = v2(0.5, 0.0), y = v2(0.5, 0.8);
    const Vec v_guess = v2(1.2, 0.7);
    const auto path = two_point_solve(pr, x, y, v_guess, 1.0, policy);
    REQUIRE(path.events.size() == 1);
    CHECK((path.position(1.0, Side::Minus) - y).norm() < 1e-9);
    const Vec v0 = path.velocity(0.0);
    const Vec unfolded = v2(1.0, 0.8);  // to the mirror image of y
    CHECK((v0 - unfolded).norm() < 1e-8);
  }
  SUBCASE("conjugate endpoints raise on the sphere") {
    Problem raw;
    raw.geom = make_chart_sphere_polar();
    raw.potential = make_potential_zero();
    auto pr = std::make_shared<const Problem>(std::move(raw));
    CHECK_THROWS_AS(two_point_solve(pr, v2(M_PI / 2, 0.0), v2(M_PI / 2 + 0.05, M_PI),
                                    v2(0.0, 1.0), M_PI, policy),
                    Error);
  }
}

TEST_CASE("periodic orbit refinement closes the disk diameter orbit") {
  auto pr = disk_problem();
  EventPolicy policy;
  const auto orbit = refine_periodic_orbit(pr, v2(0.3, 0.0), v2(1.0, 0.0), 4.0, policy);
  CHECK(orbit.periodic);
  CHECK((orbit.position(4.0, Side::Minus) - orbit.position(0.0)).norm() < 1e-9);
  CHECK((orbit.velocity(4.0, Side::Minus) - orbit.velocity(0.0)).norm() < 1e-9);
  REQUIRE(orbit.events.size() == 2);
}
