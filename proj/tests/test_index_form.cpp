#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rjf/index_form.hpp"

using namespace rjf;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ProblemPtr make_problem(ChartGeometry g, std::optional<HypersurfaceSpec> s, PotentialSpec p) {
  Problem pr;
  pr.geom = std::move(g);
  pr.surface = std::move(s);
  pr.potential = std::move(p);
  return std::make_shared<const Problem>(std::move(pr));
}

ProblemPtr flat_free() {
  return make_problem(make_chart_euclidean(2), {}, make_potential_zero());
}

ProblemPtr strip() {
  Polynomial rho;
  rho.dim = 2;
  rho.terms = {{1.0, {1, 0}}, {-1.0, {2, 0}}};
  auto s = make_surface_polynomial(rho, +1);
  s.boundary = true;
  return make_problem(make_chart_euclidean(2), std::move(s), make_potential_zero());
}

ProblemPtr sphere() {
  return make_problem(make_chart_sphere_polar(), {}, make_potential_zero());
}

ProblemPtr harmonic() {
  return make_problem(make_chart_euclidean(2), {}, make_potential_harmonic(1.0));
}

ReflectedPath sphere_geodesic(double T) {
  EventPolicy policy;
  return shoot(sphere(), v2(M_PI / 2, 0.0), v2(0.0, 1.0), T, policy);
}

ReflectedPath harmonic_line(double T) {
  EventPolicy policy;
  return shoot(harmonic(), v2(0, 0), v2(1.0, 0.0), T, policy);
}

ReflectedPath strip_path(double T) {
  EventPolicy policy;
  return shoot(strip(), v2(0.5, 0.0), v2(1.0, 0.25), T, policy);
}

}  // namespace

TEST_CASE("second variation of a sine field in flat space") {
  auto pr = flat_free();
  EventPolicy policy;
  const double T = 2.0;
  const auto path = shoot(pr, v2(0, 0), v2(1.0, 0.0), T, policy);
  const Vec e = v2(0.0, 1.3);
  AnalyticField W(path, [&](double t) { return Vec(std::sin(M_PI * t / T) * e); },
                  [&](double t) { return Vec(M_PI / T * std::cos(M_PI * t / T) * e); });
  const double val = second_variation(path, W, W, BoundaryCondition::Fixed);
  const double expect = M_PI * M_PI / (2.0 * T) * e.squaredNorm();
  CHECK(val == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("null-space realization: Jacobi fields vanishing at both endpoints") {
  const auto path = sphere_geodesic(M_PI);
  // the normal field sin(t) e_theta vanishes at 0 and T = pi
  PropagatedField W(propagate_jacobi(path, v2(0, 0), v2(1.0, 0.0)));
  auto space = std::make_shared<const BrokenJacobiSpace>(path, 8, BoundaryCondition::Fixed);
  Rng rng(41);
  for (int i = 0; i < 20; ++i) {
    BrokenField Z(space, random_coords(*space, rng));
    CHECK(std::abs(second_variation(path, W, Z, BoundaryCondition::Fixed)) < 1e-7);
  }
}

TEST_CASE("symmetry and bilinearity on random broken fields") {
  const auto path = strip_path(2.0);
  auto space = std::make_shared<const BrokenJacobiSpace>(path, 6, BoundaryCondition::Fixed);
  Rng rng(43);
  for (int rep = 0; rep < 5; ++rep) {
    const Vec qa = random_coords(*space, rng), qb = random_coords(*space, rng),
              qc = random_coords(*space, rng);
    BrokenField A(space, qa), B(space, qb), C(space, qc);
    const double ab = second_variation(path, A, B, BoundaryCondition::Fixed);
    const double ba = second_variation(path, B, A, BoundaryCondition::Fixed);
    CHECK(std::abs(ab - ba) < 1e-8 * std::max(1.0, std::abs(ab)));

    const double x = 1.7, y = -0.6;
    BrokenField combo(space, Vec(x * qa + y * qb));
    const double lhs = second_variation(path, combo, C, BoundaryCondition::Fixed);
    const double rhs = x * second_variation(path, A, C, BoundaryCondition::Fixed) +
                       y * second_variation(path, B, C, BoundaryCondition::Fixed);
    CHECK(std::abs(lhs - rhs) < 1e-9 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("orthogonal splitting against fields vanishing at all nodes") {
  // W is piecewise Jacobi between the coarse nodes; Z vanishes at every
  // coarse node (its nonzero values sit at strictly finer nodes), so the
  // pairing must vanish.
  const auto path = sphere_geodesic(2.5);
  auto space = std::make_shared<const BrokenJacobiSpace>(path, 6, BoundaryCondition::Fixed);
  auto fine = std::make_shared<const BrokenJacobiSpace>(path, 24, BoundaryCondition::Fixed);
  Rng rng(47);
  Vec qf = Vec::Zero(fine->dim());
  for (int j = 1; j < fine->node_count() - 1; ++j) {
    bool clash = false;
    for (double tc : space->nodes())
      if (std::abs(fine->nodes()[j] - tc) < 1e-9) clash = true;
    if (!clash)
      for (int d = 0; d < 2; ++d) qf[(j - 1) * 2 + d] = rng.uniform(-1.0, 1.0);
  }
  for (int rep = 0; rep < 3; ++rep) {
    BrokenField W(space, random_coords(*space, rng));
    BrokenField Z(fine, qf);
    CHECK(std::abs(second_variation(path, W, Z, BoundaryCondition::Fixed)) < 1e-7);
  }
}

TEST_CASE("assembled index form: flat controls") {
  EventPolicy policy;
  auto pr = flat_free();
  const auto path = shoot(pr, v2(0, 0), v2(0.7, 0.1), 3.0, policy);
  const auto rep = assemble_index_form(path, 8, BoundaryCondition::Fixed);
  CHECK(rep.index == 0);
  CHECK(rep.nullity == 0);
  CHECK(rep.eigenvalues.minCoeff() > 0.0);
}

TEST_CASE("assembled index form: strip billiard stays positive") {
  const auto path = strip_path(2.0);
  for (int k : {8, 16, 32}) {
    const auto rep = assemble_index_form(path, k, BoundaryCondition::Fixed);
    CHECK(rep.index == 0);
    CHECK(rep.nullity == 0);
    CHECK(rep.eigenvalues.minCoeff() > 0.0);
  }
}

TEST_CASE("assembled index form: sphere geodesic past one conjugate point") {
  const auto path = sphere_geodesic(1.5 * M_PI);
  const auto scan = index_stability_scan(path, 8, BoundaryCondition::Fixed);
  CHECK(scan.stable);
  for (const auto& rep : scan.reports) {
    CHECK(rep.index == 1);
    CHECK(rep.nullity == 0);
  }
}

TEST_CASE("assembled index form: harmonic line through two double conjugate points") {
  const auto path = harmonic_line(2.5 * M_PI);
  const auto scan = index_stability_scan(path, 8, BoundaryCondition::Fixed);
  CHECK(scan.stable);
  for (const auto& rep : scan.reports) {
    CHECK(rep.index == 4);
    CHECK(rep.nullity == 0);
  }
}

TEST_CASE("nullity at conjugate endpoints equals the multiplicity") {
  const auto path = sphere_geodesic(M_PI);
  const auto rep = assemble_index_form(path, 8, BoundaryCondition::Fixed);
  CHECK(rep.index == 0);
  CHECK(rep.nullity == 1);
}

TEST_CASE("monotone index staircase in the upper time limit") {
  SUBCASE("sphere: jump by 1 at pi") {
    const auto path = sphere_geodesic(1.5 * M_PI);
    const auto before = assemble_index_form(path.restrict(0.8 * M_PI), 8,
                                            BoundaryCondition::Fixed);
    const auto after = assemble_index_form(path.restrict(1.2 * M_PI), 8,
                                           BoundaryCondition::Fixed);
    CHECK(before.index == 0);
    CHECK(after.index == 1);
  }
  SUBCASE("harmonic: jumps by 2 at pi and 2 pi") {
    const auto path = harmonic_line(2.5 * M_PI);
    const int idx[4] = {0, 2, 2, 4};
    const double taus[4] = {0.9 * M_PI, 1.5 * M_PI, 1.9 * M_PI, 2.2 * M_PI};
    for (int i = 0; i < 4; ++i) {
      const auto rep = assemble_index_form(path.restrict(taus[i]), 8, BoundaryCondition::Fixed);
      CHECK(rep.index == idx[i]);
    }
  }
}

TEST_CASE("short-cell positivity validation rejects coarse nodes") {
  // two cells over a sphere geodesic of length 2.5 pi: each cell spans more
  // than pi, so it contains a conjugate pair and must be rejected
  const auto path = sphere_geodesic(2.5 * M_PI);
  CHECK_THROWS_AS(assemble_index_form(path, 2, BoundaryCondition::Fixed), Error);
}

TEST_CASE("invalid fields are rejected") {
  auto pr = flat_free();
  EventPolicy policy;
  const auto path = shoot(pr, v2(0, 0), v2(1.0, 0.0), 2.0, policy);
  AnalyticField bad(path, [](double t) { return Vec(v2(t, 0.0)); },
                    [](double) { return Vec(v2(1.0, 0.0)); });
  AnalyticField ok(path, [](double t) { return Vec(v2(0.0, std::sin(M_PI * t / 2.0))); },
                   [](double t) { return Vec(v2(0.0, M_PI / 2.0 * std::cos(M_PI * t / 2.0))); });
  CHECK_THROWS_AS(second_variation(path, bad, ok, BoundaryCondition::Fixed), Error);
}
