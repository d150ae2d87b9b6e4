#pragma once
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "rjf/types.hpp"

namespace rjf {

using OdeRhs = std::function<void(double t, const Vec& y, Vec& dydt)>;

// One accepted Dormand-Prince 5(4) step with its quartic dense-output
// coefficients (Hairer's contd5 layout).
struct OdeStep {
  double t0 = 0, h = 0;
  Vec r1, r2, r3, r4, r5;

  Vec eval(double t) const {
    const double th = (t - t0) / h, th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
  // d/dt of the dense interpolant. Expanded form of the nested polynomial:
  // p(th) = r1 + th r2 + th(1-th) r3 + th^2(1-th) r4 + th^2(1-th)^2 r5.
  Vec eval_deriv(double t) const {
    const double th = (t - t0) / h;
    Vec d = r2 + (1.0 - 2.0 * th) * r3 + th * (2.0 - 3.0 * th) * r4 +
            th * (2.0 - 6.0 * th + 4.0 * th * th) * r5;
    return d / h;
  }
};

// Dense piecewise-polynomial solution over [t_begin, t_end].
struct DenseSolution {
  double t_begin = 0, t_end = 0;
  std::vector<OdeStep> steps;

  const OdeStep& step_at(double t) const;
  Vec eval(double t) const { return step_at(t).eval(t); }
  Vec eval_deriv(double t) const { return step_at(t).eval_deriv(t); }
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;  // 0: choose automatically
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 4000000;
};

// Adaptive Dormand-Prince 5(4) with dense output. Call step() repeatedly;
// each accepted step is appended to solution().
class Dopri5 {
public:
  Dopri5(OdeRhs rhs, double t0, Vec y0, double t_end, OdeOptions opts);

  // Advance one accepted step. Returns false once t_end was reached.
  bool step();
  bool done() const { return done_; }
  double t() const { return t_; }
  const Vec& y() const { return y_; }
  const DenseSolution& solution() const { return sol_; }
  DenseSolution take_solution() { return std::move(sol_); }
  const OdeStep& last_step() const { return sol_.steps.back(); }

private:
  double initial_step() const;

  OdeRhs rhs_;
  double t_, t_end_;
  Vec y_, f_;  // FSAL derivative at (t_, y_)
  OdeOptions opts_;
  DenseSolution sol_;
  double h_ = 0;
  long n_steps_ = 0;
  bool done_ = false;
};

}  // namespace rjf
