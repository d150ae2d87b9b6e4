#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rjf/geometry.hpp"

using namespace rjf;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Polynomial poly2(std::initializer_list<std::tuple<double, int, int>> terms) {
  Polynomial p;
  p.dim = 2;
  for (const auto& [c, e1, e2] : terms) p.terms.push_back({c, {e1, e2}});
  return p;
}

}  // namespace

TEST_CASE("christoffel symbols on the built-in charts") {
  const auto euc = make_chart_euclidean(2);
  const auto polar = make_chart_polar_flat();
  const auto sphere = make_chart_sphere_polar();
  const auto conf = make_chart_conformal(poly2({{0.1, 1, 0}, {0.05, 0, 2}}), 2);

  SUBCASE("euclidean: identically zero") {
    const auto gamma = christoffel(euc, v2(0.3, -1.2));
    for (const auto& m : gamma) CHECK(m.norm() == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("polar plane at r=2") {
    const auto gamma = christoffel(polar, v2(2.0, 0.7));
    CHECK(gamma[0](1, 1) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(gamma[1](0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("sphere chart on the equator") {
    const auto gamma = christoffel(sphere, v2(M_PI / 2, 0.3));
    CHECK(gamma[0](1, 1) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("lower-index symmetry at 200 random points per chart") {
    Rng rng(7);
    for (int rep = 0; rep < 200; ++rep) {
      for (const auto* chart : {&euc, &polar, &sphere, &conf}) {
        Vec x = v2(rng.uniform(0.5, 2.5), rng.uniform(-1.0, 1.0));
        const auto gamma = christoffel(*chart, x);
        for (const auto& m : gamma) CHECK((m - m.transpose()).norm() < 1e-13);
      }
    }
  }
  SUBCASE("degenerate metric raises") {
    CHECK_THROWS_AS(christoffel(polar, v2(0.0, 0.0)), Error);
  }
}

TEST_CASE("metric derivative fallback matches analytic derivatives") {
  const auto sphere = make_chart_sphere_polar();
  auto fd = build_fd_metric_derivs(sphere.metric, 2, sphere.h_g);
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Vec x = v2(rng.uniform(0.4, 2.6), rng.uniform(-2.0, 2.0));
    const auto da = sphere.metric_derivs(x);
    const auto dn = fd(x);
    for (int k = 0; k < 2; ++k) {
      const double scale = std::max(1.0, da[k].norm());
      CHECK((da[k] - dn[k]).norm() / scale < 10.0 * sphere.h_g * sphere.h_g);
    }
  }
}

TEST_CASE("curvature on the built-in charts") {
  const auto euc = make_chart_euclidean(2);
  const auto sphere = make_chart_sphere_polar();
  Rng rng(3);

  SUBCASE("flat space: R vanishes") {
    for (int rep = 0; rep < 10; ++rep) {
      const Vec x = rng.uniform_vec(2, -2.0, 2.0);
      const Vec u = rng.uniform_vec(2, -1.0, 1.0), v = rng.uniform_vec(2, -1.0, 1.0),
                w = rng.uniform_vec(2, -1.0, 1.0);
      CHECK(riemann(euc, x, u, v, w).norm() < 1e-9);
    }
  }
  SUBCASE("unit sphere: R(u,v)u = v for orthonormal u, v") {
    const Vec x = v2(M_PI / 2, 0.4);
    const Vec u = v2(1.0, 0.0), v = v2(0.0, 1.0);  // orthonormal at the equator
    const Vec r = riemann(sphere, x, u, v, u);
    CHECK((r - v).norm() < 5e-6);
  }
  SUBCASE("sectional curvature 1 at random points of the sphere chart") {
    for (int rep = 0; rep < 10; ++rep) {
      const Vec x = v2(rng.uniform(0.5, 2.5), rng.uniform(-1.0, 1.0));
      // g-orthonormal frame from the coordinate frame
      Vec u = v2(1.0, 0.0);
      u /= g_norm(sphere, x, u);
      Vec w = v2(0.0, 1.0);
      w -= inner(sphere, x, w, u) * u;
      w /= g_norm(sphere, x, w);
      const double k = inner(sphere, x, riemann(sphere, x, u, w, u), w);
      CHECK(k == doctest::Approx(1.0).epsilon(5e-6));
    }
  }
  SUBCASE("antisymmetry in the first arguments") {
    for (int rep = 0; rep < 10; ++rep) {
      const Vec x = v2(rng.uniform(0.5, 2.5), rng.uniform(-1.0, 1.0));
      const Vec u = rng.uniform_vec(2, -1.0, 1.0), w = rng.uniform_vec(2, -1.0, 1.0);
      CHECK(riemann(sphere, x, u, u, w).norm() < 1e-12);
      const Vec v = rng.uniform_vec(2, -1.0, 1.0);
      CHECK((riemann(sphere, x, u, v, w) + riemann(sphere, x, v, u, w)).norm() < 1e-9);
    }
  }
}

TEST_CASE("normal/tangent splitting") {
  const auto euc = make_chart_euclidean(2);

  SUBCASE("flat wall") {
    const auto wall = make_surface_hyperplane(2, 0.0, +1);
    const auto sp = split_normal_tangent(euc, wall, v2(0.0, 2.0), v2(3.0, 4.0));
    CHECK((sp.perp - v2(3.0, 0.0)).norm() < 1e-14);
    CHECK((sp.top - v2(0.0, 4.0)).norm() < 1e-14);
    const auto sp2 = split_normal_tangent(euc, wall, v2(0.0, -1.0), v2(0.0, 7.0));
    CHECK(sp2.perp.norm() < 1e-14);
  }
  SUBCASE("unit circle with inward normal") {
    const auto circle = make_surface_sphere_level(2, 1.0, +1);
    const auto sp = split_normal_tangent(euc, circle, v2(1.0, 0.0), v2(1.0, 1.0));
    CHECK((sp.perp - v2(1.0, 0.0)).norm() < 1e-12);
    CHECK((sp.top - v2(0.0, 1.0)).norm() < 1e-12);
  }
  SUBCASE("off-surface point rejected") {
    const auto wall = make_surface_hyperplane(2, 0.0, +1);
    CHECK_THROWS_AS(split_normal_tangent(euc, wall, v2(0.5, 0.0), v2(1.0, 0.0)), Error);
  }
  SUBCASE("normal has unit g-norm, conformal chart") {
    const auto conf = make_chart_conformal(poly2({{0.1, 1, 0}, {0.05, 0, 2}}), 2);
    const auto circle = make_surface_sphere_level(2, 1.0, +1);
    Rng rng(5);
    for (int rep = 0; rep < 10; ++rep) {
      const double a = rng.uniform(0.0, 2.0 * M_PI);
      const Vec y = v2(std::cos(a), std::sin(a));
      const Vec N = unit_normal(conf, circle, y);
      CHECK(std::abs(g_norm(conf, y, N) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("second fundamental form and shape operator") {
  const auto euc = make_chart_euclidean(2);
  const auto wall = make_surface_hyperplane(2, 0.0, +1);
  const auto circle = make_surface_sphere_level(2, 1.0, +1);

  SUBCASE("flat wall is totally geodesic") {
    const Vec y = v2(0.0, 1.3), u = v2(0.0, 2.0);
    CHECK(second_fundamental_form(euc, wall, y, u, u) == doctest::Approx(0.0));
    CHECK(shape_operator(euc, wall, y, u).norm() < 1e-10);
  }
  SUBCASE("unit circle with inward normal: II(u,u) = +1, shape = identity") {
    const Vec y = v2(1.0, 0.0), u = v2(0.0, 1.0);
    CHECK(second_fundamental_form(euc, circle, y, u, u) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((shape_operator(euc, circle, y, u) - u).norm() < 1e-9);
  }
  SUBCASE("symmetry and self-adjointness on random tangent data") {
    Rng rng(13);
    for (int rep = 0; rep < 10; ++rep) {
      const double a = rng.uniform(0.0, 2.0 * M_PI);
      const Vec y = v2(std::cos(a), std::sin(a));
      const Vec tang = v2(-std::sin(a), std::cos(a));
      const Vec u = rng.uniform(-2.0, 2.0) * tang;
      const Vec w = rng.uniform(-2.0, 2.0) * tang;
      CHECK(second_fundamental_form(euc, circle, y, u, w) ==
            doctest::Approx(second_fundamental_form(euc, circle, y, w, u)).epsilon(1e-9));
      CHECK(inner(euc, y, shape_operator(euc, circle, y, u), w) ==
            doctest::Approx(inner(euc, y, u, shape_operator(euc, circle, y, w))).epsilon(1e-9));
    }
  }
  SUBCASE("consistency with the tangential-extension route") {
    // II(u,v) = -<v, grad_u N> must match <grad_u v_ext, N> for v extended
    // tangentially to the nearby level sets.
    Rng rng(17);
    for (int rep = 0; rep < 5; ++rep) {
      const double a = rng.uniform(0.0, 2.0 * M_PI);
      const Vec y = v2(std::cos(a), std::sin(a));
      const Vec tang = v2(-std::sin(a), std::cos(a));
      const Vec u = tang, v0 = 1.7 * tang;
      auto v_ext = [&](const Vec& x) {
        const Vec N = unit_normal(euc, circle, x);
        return Vec(v0 - inner(euc, x, v0, N) * N);
      };
      const double h = 1e-5;
      Vec dv = Vec::Zero(2);
      for (int d = 0; d < 2; ++d) {
        Vec xp = y, xm = y;
        xp[d] += h;
        xm[d] -= h;
        dv += u[d] * (v_ext(xp) - v_ext(xm)) / (2.0 * h);
      }
      const Vec cov = dv + gamma_apply(christoffel(euc, y), u, v_ext(y));
      const double ii_direct = second_fundamental_form(euc, circle, y, u, v_ext(y));
      const double ii_ext = inner(euc, y, cov, unit_normal(euc, circle, y));
      CHECK(std::abs(ii_direct - ii_ext) < 5e-7);
    }
  }
  SUBCASE("non-tangent input rejected") {
    CHECK_THROWS_AS(second_fundamental_form(euc, circle, v2(1.0, 0.0), v2(1.0, 0.0),
                                            v2(0.0, 1.0)),
                    Error);
  }
}

TEST_CASE("piecewise potential C1 validation") {
  const auto euc = make_chart_euclidean(2);
  const auto wall = make_surface_hyperplane(2, 0.0, +1);
  // matched: V+ = x^2 + y^2, V- = x^2 + y^2 + x^3 (same value/gradient on x=0)
  const auto vp = poly2({{1.0, 2, 0}, {1.0, 0, 2}});
  const auto vm = poly2({{1.0, 2, 0}, {1.0, 0, 2}, {1.0, 3, 0}});
  CHECK_NOTHROW(validate_piecewise_c1(euc, wall, vp, vm, v2(0.0, 0.0), 3.0, 1));
  // mismatched gradient: V- has an extra x term
  const auto vbad = poly2({{1.0, 2, 0}, {1.0, 0, 2}, {0.5, 1, 0}});
  CHECK_THROWS_AS(validate_piecewise_c1(euc, wall, vp, vbad, v2(0.0, 0.0), 3.0, 1), Error);
}
