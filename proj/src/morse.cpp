#include "rjf/morse.hpp"

#include <algorithm>
#include <cmath>

namespace rjf {

FixedIndexResult fixed_endpoint_index_theorem(const ReflectedPath& path, int k0,
                                              double tol_eig) {
  FixedIndexResult out;
  out.report = stable_index(path, k0, BoundaryCondition::Fixed, tol_eig);
  out.scan = conjugate_points(path, path.problem->tol.grid_dt, path.problem->tol.tol_rank);
  out.conjugate_count = out.scan.total_multiplicity_interior(path.total_time);
  out.endpoint_multiplicity = out.scan.endpoint_multiplicity;
  out.pass = out.report.index == out.conjugate_count;
  return out;
}

ActionHessian action_hessian(ProblemPtr problem, const ReflectedPath& orbit,
                             const EventPolicy& policy, double h) {
  const int n = problem->geom.dim;
  const double T = orbit.total_time;
  const Vec p = orbit.position(0.0);
  const Vec v0 = orbit.velocity(0.0);

  if (problem->surface && std::abs(problem->surface->rho(p)) < problem->tol.tol_Y)
    throw Error(ErrorCode::InputError, "base point lies on the hypersurface");
  if (self_conjugacy_ratio(orbit) < 1e-7)
    throw Error(ErrorCode::SelfConjugate, "base point conjugate to itself");

  auto diag_action = [&](const Vec& x) {
    const ReflectedPath path = two_point_solve(problem, x, x, v0, T, policy);
    return action(path);
  };

  ActionHessian out;
  out.base = p;
  out.h = h;
  out.hess = Mat::Zero(n, n);
  const double f0 = diag_action(p);
  for (int i = 0; i < n; ++i) {
    Vec xp = p, xm = p;
    xp[i] += h;
    xm[i] -= h;
    out.hess(i, i) = (diag_action(xp) - 2.0 * f0 + diag_action(xm)) / (h * h);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vec xpp = p, xpm = p, xmp = p, xmm = p;
      xpp[i] += h; xpp[j] += h;
      xpm[i] += h; xpm[j] -= h;
      xmp[i] -= h; xmp[j] += h;
      xmm[i] -= h; xmm[j] -= h;
      const double v =
          (diag_action(xpp) - diag_action(xpm) - diag_action(xmp) + diag_action(xmm)) /
          (4.0 * h * h);
      out.hess(i, j) = v;
      out.hess(j, i) = v;
    }

  Eigen::SelfAdjointEigenSolver<Mat> eig(out.hess);
  out.eigenvalues = eig.eigenvalues();

  // Deflate the along-orbit direction: the stencil probes straight coordinate
  // lines while the exact null runs along the curved orbit, which pollutes
  // that eigenvalue with an O(h^2) artifact.
  Vec vdir = v0 / v0.norm();
  Mat q(n, n - 1);
  {
    Eigen::HouseholderQR<Mat> qr((Mat(vdir)));
    const Mat full = qr.householderQ() * Mat::Identity(n, n);
    q = full.rightCols(n - 1);
  }
  const Mat reduced = q.transpose() * out.hess * q;
  Eigen::SelfAdjointEigenSolver<Mat> red_eig(reduced);
  out.reduced_eigenvalues = red_eig.eigenvalues();

  // zero classification threshold from the finite-difference noise model:
  // solver jitter eta/h^2 against truncation ~ h^2
  const double eta = 1e-11;
  const double lmax = std::max(1.0, out.reduced_eigenvalues.cwiseAbs().maxCoeff());
  out.zero_tol = std::max(4.0 * eta / (h * h), 10.0 * h * h) * lmax;
  out.nullity = 1;  // the along-orbit null
  for (int i = 0; i < out.reduced_eigenvalues.size(); ++i) {
    if (out.reduced_eigenvalues[i] < -out.zero_tol)
      ++out.index;
    else if (out.reduced_eigenvalues[i] <= out.zero_tol)
      ++out.nullity;
  }
  return out;
}

double default_base_time(const ReflectedPath& orbit) {
  if (orbit.events.empty()) return 0.5 * orbit.total_time;
  return 0.5 * orbit.events.front().time;
}

ReflectedPath rebase_periodic(ProblemPtr problem, const ReflectedPath& orbit,
                              const EventPolicy& policy, double base_time,
                              EventPolicy* rotated_policy) {
  const double T = orbit.total_time;
  EventPolicy rotated = policy;
  if (!policy.decisions.empty()) {
    size_t consumed = 0;
    for (const auto& ev : orbit.events)
      if (ev.time <= base_time && consumed < policy.decisions.size()) ++consumed;
    std::rotate(rotated.decisions.begin(), rotated.decisions.begin() + consumed,
                rotated.decisions.end());
  }
  if (rotated_policy) *rotated_policy = rotated;
  ReflectedPath rebased =
      shoot(problem, orbit.position(base_time), orbit.velocity(base_time), T, rotated);
  rebased.periodic = true;
  const double gap = (rebased.position(T, Side::Minus) - rebased.position(0.0)).norm() +
                     (rebased.velocity(T, Side::Minus) - rebased.velocity(0.0)).norm();
  if (gap > 1e-8)
    throw Error(ErrorCode::NewtonDivergence, "re-based orbit does not close");
  return rebased;
}

PeriodicReport periodic_index_theorem(ProblemPtr problem, const ReflectedPath& orbit,
                                      const EventPolicy& policy, const PeriodicOptions& opts) {
  PeriodicReport rep;
  rep.base_time = opts.base_time >= 0.0 ? opts.base_time : default_base_time(orbit);
  EventPolicy rotated;
  const ReflectedPath based = rebase_periodic(problem, orbit, policy, rep.base_time, &rotated);
  rep.base_point = based.position(0.0);

  rep.conjugacy_ratio = self_conjugacy_ratio(based);
  if (rep.conjugacy_ratio < opts.self_conjugacy_tol) {
    rep.self_conjugate = true;
    return rep;
  }

  const FixedIndexResult fixed = fixed_endpoint_index_theorem(based, opts.k0, opts.tol_eig);
  rep.fixed_index = fixed.report.index;
  rep.conjugate_count = fixed.conjugate_count;
  rep.fixed_report = fixed.report;

  rep.periodic_report = stable_index(based, opts.k0, BoundaryCondition::Periodic, opts.tol_eig);
  rep.periodic_index = rep.periodic_report.index;
  rep.periodic_nullity = rep.periodic_report.nullity;

  rep.hessian = action_hessian(problem, based, rotated, opts.hess_h);
  const ActionHessian half = action_hessian(problem, based, rotated, 0.5 * opts.hess_h);
  if (half.index != rep.hessian.index)
    throw Error(ErrorCode::InconclusiveIndex,
                "endpoint-action Hessian index unstable under step halving");
  rep.concavity_index = rep.hessian.index;

  rep.identity_holds = rep.periodic_index == rep.fixed_index + rep.concavity_index;
  return rep;
}

JacobiField closed_jacobi_field(const ReflectedPath& path, const Vec& w,
                                double jump_perturbation) {
  const int n = path.dim();
  const EndpointMap em = endpoint_map(path);
  // solve W(T) = w with W(0) = w for the initial derivative
  const Mat B = em.B();
  Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto sv = svd.singularValues();
  if (sv.minCoeff() < 1e-10 * sv.maxCoeff())
    throw Error(ErrorCode::SelfConjugate, "closed-field solve failed: self-conjugate base");
  JacobiOptions opts;
  opts.jump_perturbation = jump_perturbation;
  Vec offset = Vec::Zero(n);
  if (jump_perturbation != 0.0) {
    // the perturbed jump map is affine; absorb its constant part so that the
    // field still closes up (only the derivative jump conditions are broken)
    const JacobiField zero_field =
        propagate_jacobi(path, Vec::Zero(n), Vec::Zero(n), 0.0, path.total_time, opts);
    offset = zero_field.W(path.total_time, Side::Minus);
  }
  const Vec u0 = svd.solve(w - em.A() * w - offset);
  return propagate_jacobi(path, w, u0, 0.0, path.total_time, opts);
}

double splitting_orthogonality_check(const ReflectedPath& path, int count, std::uint64_t seed,
                                     double jump_perturbation) {
  const int n = path.dim();
  Rng rng(seed);
  auto space = std::make_shared<const BrokenJacobiSpace>(path, 10, BoundaryCondition::Fixed);
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const Vec w = rng.uniform_vec(n, -1.0, 1.0);
    PropagatedField W(closed_jacobi_field(path, w, jump_perturbation));
    BrokenField Z(space, random_coords(*space, rng));
    worst = std::max(worst, std::abs(second_variation(path, W, Z, BoundaryCondition::Periodic)));
  }
  return worst;
}

}  // namespace rjf
