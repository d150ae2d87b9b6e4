#pragma once
#include <vector>

#include "rjf/dynamics.hpp"

namespace rjf {

// Jump data of a linearized field at one event. delta_c is the tangential
// derivative of the reflection point (zero at kinks).
struct JacobiJump {
  int event_index = -1;
  double time = 0;
  Vec W_minus, U_minus;  // U = covariant derivative of W along the path
  Vec W_plus, U_plus;
  Vec delta_c;
};

// Dense piecewise solution of the linearized (Jacobi) equation along a path,
// with the reflection/kink jumps applied at events.
class JacobiField {
public:
  struct Piece {
    double t0, t1;
    DenseSolution sol;  // state [W; U]
  };

  JacobiField() = default;
  JacobiField(ProblemPtr problem, std::vector<Piece> pieces, std::vector<JacobiJump> jumps)
      : problem_(std::move(problem)), pieces_(std::move(pieces)), jumps_(std::move(jumps)) {}

  double t_begin() const { return pieces_.front().t0; }
  double t_end() const { return pieces_.back().t1; }
  Vec W(double t, Side side = Side::Plus) const;
  Vec U(double t, Side side = Side::Plus) const;  // D_t W
  const std::vector<JacobiJump>& jumps() const { return jumps_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const ProblemPtr& problem() const { return problem_; }

private:
  ProblemPtr problem_;
  std::vector<Piece> pieces_;
  std::vector<JacobiJump> jumps_;
};

struct JacobiOptions {
  double rtol = 1e-11;
  double atol = 1e-13;
  // Test hook: adds `jump_perturbation` to the tangential component of U_plus
  // at every reflection, producing a field that violates the jump conditions.
  double jump_perturbation = 0.0;
};

// The jump map at one event: mirror of W plus the derivative conditions
// (tangential jump of U driven by the shape operator, normal mean of U driven
// by the potential gradient and the second fundamental form).
JacobiJump jacobi_jump(const Problem& pr, const EventRecord& ev, const Vec& W_minus,
                       const Vec& U_minus, double jump_perturbation = 0.0);

// Residuals of the stored jump data against the defining conditions;
// independent of how the jump was constructed.
struct JumpResiduals {
  double top_membership = 0;   // |delta W_top|_g          (reflection)
  double perp_membership = 0;  // |mean W_perp|            (reflection)
  double du_top = 0;           // |delta U_top - 2 a1 S(dc)|_g
  double du_perp = 0;          // |mean U_perp + (W1/a1)(dV)_1 - II(dc, v_top)|
  double kink_w = 0;           // |delta W|_g              (kink)
  double kink_u = 0;           // |delta U|_g              (kink)
  double max() const;
};
JumpResiduals jump_residuals(const Problem& pr, const EventRecord& ev, const JacobiJump& j);

// Propagates one field along path over [t_from, t_to] (defaults: whole path).
JacobiField propagate_jacobi(const ReflectedPath& path, const Vec& W0, const Vec& U0,
                             double t_from, double t_to, const JacobiOptions& opts = {});
JacobiField propagate_jacobi(const ReflectedPath& path, const Vec& W0, const Vec& U0,
                             const JacobiOptions& opts = {});

// Basis of 2n fields with initial data (e_i, 0) and (0, e_i) over a window.
std::vector<JacobiField> propagate_full_basis(const ReflectedPath& path, double t_from,
                                              double t_to, const JacobiOptions& opts = {});
// n fields with initial data (0, e_i): the endpoint-derivative block B(t).
std::vector<JacobiField> propagate_velocity_basis(const ReflectedPath& path, double t_from,
                                                  double t_to, const JacobiOptions& opts = {});

// Stacks field values at time t: rows [W; U], one column per field.
Mat basis_matrix(const std::vector<JacobiField>& fields, double t, Side side = Side::Plus);
// W-rows only.
Mat basis_W(const std::vector<JacobiField>& fields, double t, Side side = Side::Plus);

// Linear map (W(0), U(0)) -> (W(T), U(T)) in the chart frame.
struct EndpointMap {
  Mat phi;  // 2n x 2n
  Mat A() const { const int n = phi.rows() / 2; return phi.topLeftCorner(n, n); }
  Mat B() const { const int n = phi.rows() / 2; return phi.topRightCorner(n, n); }
  Mat C() const { const int n = phi.rows() / 2; return phi.bottomLeftCorner(n, n); }
  Mat D() const { const int n = phi.rows() / 2; return phi.bottomRightCorner(n, n); }
};
EndpointMap endpoint_map(const ReflectedPath& path, const JacobiOptions& opts = {});

// Coordinate Jacobian of the time-T flow, d(x_T, v_T)/d(x_0, v_0).
Mat flow_jacobian(const ReflectedPath& path, const JacobiOptions& opts = {});

struct ConjugatePoint {
  double time = 0;
  int multiplicity = 0;
  bool sign_change = true;  // false: located through an even-order dip
};

struct ConjugateScan {
  std::vector<ConjugatePoint> points;
  std::vector<std::pair<double, double>> det_samples;  // (t, det B(t)) for plots
  double sigma_ref = 0;     // largest singular value of B(t) over the scan
  double det_scale = 0;     // largest |det B(t)| over the scan
  bool endpoint_conjugate = false;  // B(T) rank-deficient
  int endpoint_multiplicity = 0;
  int total_multiplicity_interior(double T) const;
};

ConjugateScan conjugate_points(const ReflectedPath& path, double grid_dt = 0.0,
                               double tol_rank = 1e-7, const JacobiOptions& opts = {});

// Relative smallest singular value of B(T); below ~1e-7 the start point is
// conjugate to itself (degenerate periodic setup).
double self_conjugacy_ratio(const ReflectedPath& path, const JacobiOptions& opts = {});

// Sup over sample times (outside 10*eps neighborhoods of the event times of
// either trajectory) of |(shoot(x+eps dx, v+eps dv)(t) - path(t))/eps - W(t)|.
double variation_consistency_check(const ReflectedPath& path, const EventPolicy& policy,
                                   const Vec& W0, const Vec& U0, double eps,
                                   int samples = 200);

}  // namespace rjf
