#pragma once
#include <functional>
#include <memory>
#include <vector>

#include "rjf/jacobi.hpp"

namespace rjf {

enum class BoundaryCondition { Fixed, Periodic };

// Admissible piecewise variation field along a path. Implementations provide
// one-sided values/derivatives and the interior equation residual
// D_t^2 W + R(v, W)v + HessV W (identically zero for propagated solutions).
class VariationField {
public:
  virtual ~VariationField() = default;
  virtual Vec value(double t, Side side) const = 0;
  virtual Vec deriv(double t, Side side) const = 0;  // D_t W
  virtual bool residual_free() const { return true; }
  virtual Vec residual(double t) const;              // default: zero
  virtual std::vector<double> extra_kink_times() const { return {}; }
};

// Wraps a propagated Jacobi solution.
class PropagatedField : public VariationField {
public:
  explicit PropagatedField(JacobiField f) : field_(std::move(f)) {}
  Vec value(double t, Side side) const override { return field_.W(t, side); }
  Vec deriv(double t, Side side) const override { return field_.U(t, side); }
  const JacobiField& field() const { return field_; }

private:
  JacobiField field_;
};

// Field given by closures for W(t) and dW/dt(t) in chart coordinates, smooth
// on [0, T]; admissible only along paths without reflections. The covariant
// derivative and the equation residual are formed against the path data.
class AnalyticField : public VariationField {
public:
  AnalyticField(const ReflectedPath& path, std::function<Vec(double)> w,
                std::function<Vec(double)> wdot)
      : path_(&path), w_(std::move(w)), wdot_(std::move(wdot)) {}
  Vec value(double t, Side) const override { return w_(t); }
  Vec deriv(double t, Side side) const override;
  bool residual_free() const override { return false; }
  Vec residual(double t) const override;

private:
  const ReflectedPath* path_;
  std::function<Vec(double)> w_, wdot_;
};

// Finite-dimensional space of broken Jacobi fields: continuous fields that
// solve the Jacobi equation (with event jumps) between consecutive break
// nodes. Coordinates are the field values at the interior nodes, plus one
// shared endpoint-value block for periodic boundary conditions.
class BrokenJacobiSpace {
public:
  BrokenJacobiSpace(const ReflectedPath& path, int k, BoundaryCondition bc);

  int dim() const;
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  BoundaryCondition bc() const { return bc_; }

  // Span-cell endpoint solvability and absence of interior conjugate pairs;
  // throws RefineNodes when the node spacing is too coarse.
  void validate_spans() const;

  // Value of the coordinate field at node j given global coordinates q.
  Vec node_value(const Vec& q, int j) const;

  // Samples of the coordinate field at all term sites (events, nodes,
  // endpoints); used by the quadratic-form assembly.
  struct Samples {
    std::vector<Vec> w_minus, w_plus, u_minus, u_plus;  // per site
    Vec w_begin, u_begin, w_end, u_end;                 // one-sided endpoint data
  };
  Samples sample(const Vec& q) const;

  // Value or covariant derivative of the coordinate field inside span s.
  Vec span_value(const Vec& q, int s, double t, Side side, bool deriv) const;

  // Site list shared by all sampled fields.
  struct Site {
    double time;
    int event_index;  // -1 for a pure node site
    bool is_node;
  };
  const std::vector<Site>& sites() const { return sites_; }

  // Coordinates of a globally defined admissible field (e.g. a closed Jacobi
  // field), read off from its node values.
  Vec coords_of(const JacobiField& f) const;

  const ReflectedPath& path() const { return *path_; }

private:
  struct Span {
    double a, b;
    std::vector<JacobiField> basis;  // 2n fields from (e_i, 0), (0, e_i) at a
    Mat wu_b;                        // [W;U] columns at b
    Eigen::PartialPivLU<Mat> b_block_lu;  // W-block of the (0, e_i) fields at b
    Mat a_block;                          // W-block of the (e_i, 0) fields at b
  };

  Vec span_coeff(const Vec& q, int s) const;  // (w_a; u_a) for span s

  const ReflectedPath* path_;
  BoundaryCondition bc_;
  int n_ = 0, k_ = 0;
  std::vector<double> nodes_;
  std::vector<Span> spans_;
  std::vector<Site> sites_;
  // cached basis [W;U] matrices at each site, per adjacent span
  std::vector<Mat> site_minus_;  // from the span left of the site
  std::vector<Mat> site_plus_;   // from the span right of the site
  std::vector<int> site_span_minus_, site_span_plus_;
};

// Second variation of the action on admissible fields, evaluated term by
// term: interior equation residual against Z, reflection boundary terms,
// kink terms at events and at the fields' extra kink times, and the closure
// term at t=0 for periodic boundary conditions.
double second_variation(const ReflectedPath& path, const VariationField& W,
                        const VariationField& Z, BoundaryCondition bc);

struct IndexReport {
  int k = 0;
  std::vector<double> nodes;
  Mat matrix;        // symmetrized
  Vec eigenvalues;   // ascending
  double asymmetry = 0;
  double tol_eig_abs = 0;
  int index = 0, nullity = 0, positive = 0;
};

IndexReport assemble_index_form(const ReflectedPath& path, int k, BoundaryCondition bc,
                                double tol_eig = 1e-7);

struct StabilityScan {
  std::vector<IndexReport> reports;  // k0, 2k0, 4k0
  bool stable = false;
};
StabilityScan index_stability_scan(const ReflectedPath& path, int k0, BoundaryCondition bc,
                                   double tol_eig = 1e-7);

// First report of the scan; throws InconclusiveIndex when the counts move.
IndexReport stable_index(const ReflectedPath& path, int k0, BoundaryCondition bc,
                         double tol_eig = 1e-7);

// Random admissible field: broken Jacobi field with seeded node values
// (vanishing endpoints for Fixed, shared endpoint value for Periodic).
Vec random_coords(const BrokenJacobiSpace& space, Rng& rng, double amplitude = 1.0);

// Materializes the coordinate field of a broken space as a VariationField.
class BrokenField : public VariationField {
public:
  BrokenField(std::shared_ptr<const BrokenJacobiSpace> space, Vec coords);
  Vec value(double t, Side side) const override;
  Vec deriv(double t, Side side) const override;
  std::vector<double> extra_kink_times() const override;

private:
  std::shared_ptr<const BrokenJacobiSpace> space_;
  Vec coords_;
};

}  // namespace rjf
