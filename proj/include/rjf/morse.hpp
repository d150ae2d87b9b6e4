#pragma once
#include "rjf/index_form.hpp"

namespace rjf {

struct FixedIndexResult {
  IndexReport report;    // at k0, validated by the k0/2k0/4k0 scan
  ConjugateScan scan;
  int conjugate_count = 0;  // total multiplicity strictly inside (0, T)
  int endpoint_multiplicity = 0;
  bool pass = false;        // index == conjugate_count
};

// Eigenvalue-count index versus conjugate-point count with multiplicity.
FixedIndexResult fixed_endpoint_index_theorem(const ReflectedPath& path, int k0 = 8,
                                              double tol_eig = 1e-7);

struct ActionHessian {
  Vec base;
  double h = 1e-4;
  Mat hess;         // symmetrized central-difference Hessian of x -> S(x, x)
  Vec eigenvalues;  // full spectrum, ascending (contains the along-orbit zero)
  Vec reduced_eigenvalues;  // spectrum transverse to the orbit direction
  int index = 0, nullity = 0;
  double zero_tol = 0;
};

// Hessian of the diagonal endpoint action at the orbit's start point; every
// stencil value comes from an independent two-point solve. The orbit
// direction is an exact null vector (every point of the orbit is a critical
// point of the diagonal action with the same value), so the classification
// deflates it and counts the transverse spectrum only.
ActionHessian action_hessian(ProblemPtr problem, const ReflectedPath& periodic_path,
                             const EventPolicy& policy, double h = 1e-4);

struct PeriodicReport {
  double base_time = 0;
  Vec base_point;
  bool self_conjugate = false;
  double conjugacy_ratio = 0;  // smallest/largest singular value of B(T)
  int periodic_index = 0, periodic_nullity = 0;
  int fixed_index = 0;
  int concavity_index = 0;
  int conjugate_count = 0;
  bool identity_holds = false;  // periodic == fixed + concavity
  IndexReport periodic_report, fixed_report;
  ActionHessian hessian;
};

struct PeriodicOptions {
  int k0 = 8;
  double tol_eig = 1e-7;
  double hess_h = 1e-4;
  double base_time = -1.0;  // < 0: midpoint of the first event-free gap
  double self_conjugacy_tol = 1e-7;
};

// Re-bases the closed orbit at base_time by re-shooting from that phase point
// (the event-policy decision list is rotated correspondingly).
ReflectedPath rebase_periodic(ProblemPtr problem, const ReflectedPath& orbit,
                              const EventPolicy& policy, double base_time,
                              EventPolicy* rotated_policy = nullptr);

double default_base_time(const ReflectedPath& orbit);

// The periodic identity: index of the periodic form equals the fixed-endpoint
// index at the base point plus the index of the endpoint-action Hessian.
// Self-conjugate base points produce a report with self_conjugate set and no
// identity assertion.
PeriodicReport periodic_index_theorem(ProblemPtr problem, const ReflectedPath& orbit,
                                      const EventPolicy& policy,
                                      const PeriodicOptions& opts = {});

// Max |J''(W, Z)| over `count` pairs of a closed Jacobi field W (solved from
// a random shared endpoint value through the endpoint map) and a random
// fixed-endpoint broken field Z. jump_perturbation deliberately breaks W's
// jump conditions for negative controls.
double splitting_orthogonality_check(const ReflectedPath& periodic_path, int count,
                                     std::uint64_t seed, double jump_perturbation = 0.0);

// Closed Jacobi field with W(0) = w = W(T) via the endpoint map.
JacobiField closed_jacobi_field(const ReflectedPath& periodic_path, const Vec& w,
                                double jump_perturbation = 0.0);

}  // namespace rjf
