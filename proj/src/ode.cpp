#include "rjf/ode.hpp"

#include <algorithm>
#include <cmath>

namespace rjf {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

}  // namespace

const OdeStep& DenseSolution::step_at(double t) const {
  if (steps.empty()) throw Error(ErrorCode::StepCollapse, "empty dense solution");
  // binary search for the step containing t
  size_t lo = 0, hi = steps.size() - 1;
  while (lo < hi) {
    const size_t mid = (lo + hi + 1) / 2;
    if (steps[mid].t0 <= t)
      lo = mid;
    else
      hi = mid - 1;
  }
  return steps[lo];
}

Dopri5::Dopri5(OdeRhs rhs, double t0, Vec y0, double t_end, OdeOptions opts)
    : rhs_(std::move(rhs)), t_(t0), t_end_(t_end), y_(std::move(y0)), opts_(opts) {
  f_.resizeLike(y_);
  rhs_(t_, y_, f_);
  sol_.t_begin = t0;
  sol_.t_end = t0;
  h_ = opts_.h_init > 0 ? opts_.h_init : initial_step();
  if (t_end_ <= t_) done_ = true;
}

double Dopri5::initial_step() const {
  const double span = t_end_ - t_;
  double h = 1e-4 * span;
  const double fn = f_.norm();
  if (fn > 1e-10) h = std::min(h, 0.01 * std::max(y_.norm(), 1.0) / fn);
  return std::max(h, 1e-10 * span);
}

bool Dopri5::step() {
  if (done_) return false;
  const int n = static_cast<int>(y_.size());
  Vec k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n), err(n);
  for (;;) {
    if (++n_steps_ > opts_.max_steps)
      throw Error(ErrorCode::StepCollapse, "step limit exceeded in integrator");
    h_ = std::min({h_, opts_.h_max, t_end_ - t_});
    if (h_ <= 1e-14 * std::max(1.0, std::abs(t_)))
      throw Error(ErrorCode::StepCollapse, "step size collapsed");
    const Vec& k1 = f_;
    ytmp = y_ + h_ * (a21 * k1);
    rhs_(t_ + c2 * h_, ytmp, k2);
    ytmp = y_ + h_ * (a31 * k1 + a32 * k2);
    rhs_(t_ + c3 * h_, ytmp, k3);
    ytmp = y_ + h_ * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs_(t_ + c4 * h_, ytmp, k4);
    ytmp = y_ + h_ * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs_(t_ + c5 * h_, ytmp, k5);
    ytmp = y_ + h_ * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs_(t_ + h_, ytmp, k6);
    y1 = y_ + h_ * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs_(t_ + h_, y1, k7);
    err = h_ * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double errnorm = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y_[i]), std::abs(y1[i]));
      const double q = err[i] / sc;
      errnorm += q * q;
    }
    errnorm = std::sqrt(errnorm / n);

    if (errnorm <= 1.0) {
      OdeStep st;
      st.t0 = t_;
      st.h = h_;
      const Vec ydiff = y1 - y_;
      const Vec bspl = h_ * k1 - ydiff;
      st.r1 = y_;
      st.r2 = ydiff;
      st.r3 = bspl;
      st.r4 = ydiff - h_ * k7 - bspl;
      st.r5 = h_ * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      sol_.steps.push_back(std::move(st));
      t_ += h_;
      sol_.t_end = t_;
      y_ = y1;
      f_ = k7;  // FSAL
      const double fac = std::clamp(0.9 * std::pow(errnorm, -0.2), 0.2, 5.0);
      h_ *= fac;
      if (t_ >= t_end_ - 1e-14 * std::max(1.0, std::abs(t_end_))) {
        t_ = t_end_;
        sol_.t_end = t_end_;
        done_ = true;
      }
      return true;
    }
    h_ *= std::clamp(0.9 * std::pow(errnorm, -0.2), 0.1, 1.0);
  }
}

}  // namespace rjf
