#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rjf/morse.hpp"

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

ProblemPtr disk() {
  auto s = make_surface_sphere_level(2, 1.0, +1);
  s.boundary = true;
  return make_problem(make_chart_euclidean(2), std::move(s), make_potential_zero());
}

ReflectedPath disk_diameter_orbit(const ProblemPtr& pr) {
  EventPolicy policy;
  return refine_periodic_orbit(pr, v2(0.3, 0.0), v2(1.0, 0.0), 4.0, policy);
}

}  // namespace

TEST_CASE("fixed-endpoint index theorem") {
  EventPolicy policy;
  SUBCASE("flat strip billiard: zero index, zero conjugate points") {
    Polynomial rho;
    rho.dim = 2;
    rho.terms = {{1.0, {1, 0}}, {-1.0, {2, 0}}};
    auto s = make_surface_polynomial(rho, +1);
    s.boundary = true;
    auto pr = make_problem(make_chart_euclidean(2), std::move(s), make_potential_zero());
    const auto path = shoot(pr, v2(0.5, 0.0), v2(1.0, 0.3), 3.0, policy);
    REQUIRE(path.events.size() == 3);
    const auto res = fixed_endpoint_index_theorem(path);
    CHECK(res.pass);
    CHECK(res.report.index == 0);
    CHECK(res.conjugate_count == 0);
  }
  SUBCASE("harmonic line: index 4 equals two double conjugate points") {
    auto pr = make_problem(make_chart_euclidean(2), {}, make_potential_harmonic(1.0));
    const auto path = shoot(pr, v2(0, 0), v2(1.0, 0.0), 2.5 * M_PI, policy);
    const auto res = fixed_endpoint_index_theorem(path);
    CHECK(res.pass);
    CHECK(res.report.index == 4);
    CHECK(res.conjugate_count == 4);
  }
  SUBCASE("sphere geodesic: index 1") {
    auto pr = make_problem(make_chart_sphere_polar(), {}, make_potential_zero());
    const auto path = shoot(pr, v2(M_PI / 2, 0.0), v2(0.0, 1.0), 1.5 * M_PI, policy);
    const auto res = fixed_endpoint_index_theorem(path);
    CHECK(res.pass);
    CHECK(res.report.index == 1);
    CHECK(res.conjugate_count == 1);
  }
  SUBCASE("disk chord with exactly one focusing point") {
    auto pr = disk();
    const double theta = 30.0 * M_PI / 180.0;
    const double d1 = 0.8 * std::cos(theta);
    const Vec dir = v2(std::cos(theta), std::sin(theta));
    const auto path = shoot(pr, Vec(v2(1.0, 0.0) - d1 * dir), dir,
                            d1 + 1.9 * std::cos(theta), policy);
    const auto res = fixed_endpoint_index_theorem(path);
    CHECK(res.pass);
    CHECK(res.report.index == 1);
    CHECK(res.conjugate_count == 1);
  }
}

TEST_CASE("endpoint-action Hessian on the disk diameter orbit") {
  auto pr = disk();
  const auto orbit = disk_diameter_orbit(pr);
  EventPolicy policy;
  // re-base off the center so the solve is non-degenerate
  const auto based = rebase_periodic(pr, orbit, policy, 0.35);
  const auto hess = action_hessian(pr, based, policy, 1e-3);
  // every nearby diameter loop has the same action: the Hessian vanishes
  CHECK(hess.index == 0);
  CHECK(hess.nullity == 2);
  CHECK(hess.hess.cwiseAbs().maxCoeff() < hess.zero_tol);
  const auto hess2 = action_hessian(pr, based, policy, 5e-4);
  CHECK(hess2.index == hess.index);
}

TEST_CASE("periodic index theorem on the disk diameter orbit") {
  auto pr = disk();
  const auto orbit = disk_diameter_orbit(pr);
  EventPolicy policy;
  PeriodicOptions opts;
  opts.hess_h = 1e-3;
  const auto rep = periodic_index_theorem(pr, orbit, policy, opts);
  REQUIRE_FALSE(rep.self_conjugate);
  CHECK(rep.identity_holds);
  CHECK(rep.fixed_index == 1);
  CHECK(rep.concavity_index == 0);
  CHECK(rep.periodic_index == 1);
  // the velocity field and the orbit-rotation field are closed null modes
  CHECK(rep.periodic_nullity == 2);
}

TEST_CASE("base-point choice moves the split but not the sum") {
  auto pr = disk();
  const auto orbit = disk_diameter_orbit(pr);
  EventPolicy policy;
  int sum_ref = -1;
  for (double base : {0.35, 1.2, 3.1}) {
    PeriodicOptions opts;
    opts.hess_h = 1e-3;
    opts.base_time = base;
    const auto rep = periodic_index_theorem(pr, orbit, policy, opts);
    REQUIRE_FALSE(rep.self_conjugate);
    CHECK(rep.identity_holds);
    const int sum = rep.fixed_index + rep.concavity_index;
    if (sum_ref < 0) sum_ref = sum;
    CHECK(sum == sum_ref);
    CHECK(rep.periodic_index == sum_ref);
  }
}

TEST_CASE("self-conjugate base point is reported, not asserted") {
  auto pr = disk();
  const auto orbit = disk_diameter_orbit(pr);
  EventPolicy policy;
  // the centre of the disk is conjugate to itself along the diameter orbit
  PeriodicOptions opts;
  opts.base_time = 1.7;  // orbit reaches the centre here
  const auto rep = periodic_index_theorem(pr, orbit, policy, opts);
  CHECK(rep.self_conjugate);
  CHECK(rep.conjugacy_ratio < 1e-7);
}

TEST_CASE("splitting orthogonality of closed Jacobi fields") {
  auto pr = disk();
  const auto orbit = disk_diameter_orbit(pr);
  EventPolicy policy;
  const auto based = rebase_periodic(pr, orbit, policy, 0.35);
  SUBCASE("closed fields against fixed-endpoint fields") {
    CHECK(splitting_orthogonality_check(based, 20, 71) < 1e-7);
  }
  SUBCASE("zero endpoint value gives zero") {
    PropagatedField W(closed_jacobi_field(based, v2(0, 0)));
    auto space = std::make_shared<const BrokenJacobiSpace>(based, 10, BoundaryCondition::Fixed);
    Rng rng(73);
    BrokenField Z(space, random_coords(*space, rng));
    CHECK(std::abs(second_variation(based, W, Z, BoundaryCondition::Periodic)) < 1e-12);
  }
  SUBCASE("broken jump conditions are detected") {
    CHECK(splitting_orthogonality_check(based, 20, 71, 1e-2) > 1e-4);
  }
}

TEST_CASE("block additivity of the periodic index along the splitting") {
  auto pr = disk();
  const auto orbit = disk_diameter_orbit(pr);
  EventPolicy policy;
  const auto based = rebase_periodic(pr, orbit, policy, 0.35);

  const int k = 8, n = 2;
  const auto rep = assemble_index_form(based, k, BoundaryCondition::Periodic);
  BrokenJacobiSpace space(based, k, BoundaryCondition::Periodic);

  // coordinates of the closed Jacobi fields spanning the complement block
  Mat C(space.dim(), n);
  for (int i = 0; i < n; ++i) {
    Vec w = Vec::Zero(n);
    w[i] = 1.0;
    C.col(i) = space.coords_of(closed_jacobi_field(based, w));
  }
  const Mat whole = rep.matrix;
  const Mat closed_block = C.transpose() * whole * C;
  const Mat interior_block = whole.topLeftCorner(n * (k - 1), n * (k - 1));

  auto count_negative = [](const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(m);
    const double tol = 1e-7 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    int neg = 0;
    for (int i = 0; i < eig.eigenvalues().size(); ++i)
      if (eig.eigenvalues()[i] < -tol) ++neg;
    return neg;
  };
  CHECK(rep.index == count_negative(closed_block) + count_negative(interior_block));

  // the closed-block index matches the endpoint-action Hessian index
  const auto hess = action_hessian(pr, based, policy, 1e-3);
  CHECK(count_negative(closed_block) == hess.index);
}
