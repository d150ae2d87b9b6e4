#include <cmath>

#include "rjf/jacobi.hpp"

namespace rjf {

ReflectedPath two_point_solve(ProblemPtr problem, const Vec& x, const Vec& y,
                              const Vec& v_guess, double T, const EventPolicy& policy) {
  const Tolerances& tol = problem->tol;
  Vec v = v_guess;
  ReflectedPath path = shoot(problem, x, v, T, policy);
  Vec miss = path.position(T, Side::Minus) - y;

  for (int iter = 0; iter < tol.newton_max_iters; ++iter) {
    if (miss.norm() < tol.newton_target) break;
    const auto fields = propagate_velocity_basis(path, 0.0, T);
    const Mat B = basis_W(fields, T, Side::Minus);
    Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto sv = svd.singularValues();
    if (sv.minCoeff() < 1e-8 * sv.maxCoeff())
      throw Error(ErrorCode::ConjugateEndpoints,
                  "endpoint derivative singular: endpoints conjugate");
    const Vec step = svd.solve(-miss);

    // damped update: halve on residual increase
    double lambda = 1.0;
    Vec v_next;
    ReflectedPath path_next;
    Vec miss_next;
    bool improved = false;
    for (int halving = 0; halving <= 8; ++halving) {
      v_next = v + lambda * step;
      path_next = shoot(problem, x, v_next, T, policy);
      miss_next = path_next.position(T, Side::Minus) - y;
      if (miss_next.norm() < miss.norm() || miss_next.norm() < tol.newton_target) {
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved)
      throw Error(ErrorCode::NewtonDivergence, "two-point solve failed to reduce the miss");
    v = v_next;
    path = std::move(path_next);
    miss = std::move(miss_next);
  }
  if (miss.norm() > tol.newton_accept)
    throw Error(ErrorCode::NewtonDivergence, "two-point solve did not reach tolerance");
  return path;
}

ReflectedPath refine_periodic_orbit(ProblemPtr problem, const Vec& x_guess,
                                    const Vec& v_guess, double T, const EventPolicy& policy) {
  const int n = problem->geom.dim;
  Vec x = x_guess, v = v_guess;

  auto residual = [&](const ReflectedPath& p) {
    Vec r(2 * n);
    r.head(n) = p.position(T, Side::Minus) - p.position(0.0);
    r.tail(n) = p.velocity(T, Side::Minus) - p.velocity(0.0);
    return r;
  };

  ReflectedPath path = shoot(problem, x, v, T, policy);
  Vec r = residual(path);

  // Levenberg-Marquardt on the closure residual. The monodromy of a closed
  // orbit keeps the flow direction (and, near symmetric configurations, an
  // almost-broken family direction) nearly null, so undamped Gauss-Newton
  // overshoots along those directions; the mu term caps them.
  double mu = 1e-3;
  for (int iter = 0; iter < 200 && r.norm() >= 1e-12; ++iter) {
    const Mat J = flow_jacobian(path);
    const Mat A = J - Mat::Identity(2 * n, 2 * n);
    const Mat ata = A.transpose() * A;
    const Vec atr = A.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 25; ++tries) {
      const Mat lhs = ata + mu * Mat::Identity(2 * n, 2 * n);
      const Vec step = lhs.ldlt().solve(-atr);
      const Vec x_next = x + step.head(n);
      const Vec v_next = v + step.tail(n);
      ReflectedPath path_next = shoot(problem, x_next, v_next, T, policy);
      Vec r_next = residual(path_next);
      if (r_next.norm() < r.norm()) {
        x = x_next;
        v = v_next;
        path = std::move(path_next);
        r = std::move(r_next);
        mu = std::max(1e-12, mu / 3.0);
        improved = true;
        break;
      }
      mu *= 4.0;
    }
    if (!improved) break;
  }
  if (r.norm() > 1e-9)
    throw Error(ErrorCode::NewtonDivergence, "periodic-orbit refinement did not close");
  path.periodic = true;
  return path;
}

}  // namespace rjf
