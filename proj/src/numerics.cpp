#include "rjf/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace rjf {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateMetric: return "degenerate-metric";
    case ErrorCode::OffSurface: return "off-surface";
    case ErrorCode::NotTangent: return "not-tangent";
    case ErrorCode::Tangency: return "tangency";
    case ErrorCode::StepCollapse: return "step-collapse";
    case ErrorCode::MaxEvents: return "max-events";
    case ErrorCode::PolicyExhausted: return "policy-exhausted";
    case ErrorCode::TransmitForbidden: return "transmit-forbidden";
    case ErrorCode::NewtonDivergence: return "newton-divergence";
    case ErrorCode::ConjugateEndpoints: return "conjugate-endpoints";
    case ErrorCode::RefineGrid: return "refine-grid";
    case ErrorCode::RefineNodes: return "refine-nodes";
    case ErrorCode::InconclusiveIndex: return "inconclusive-index";
    case ErrorCode::SelfConjugate: return "self-conjugate";
    case ErrorCode::InvalidField: return "invalid-field";
    case ErrorCode::InputError: return "input-error";
  }
  return "unknown";
}

double brent_root(const std::function<double(double)>& f, double a, double b,
                  double fa, double fb, double t_tol) {
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * 1e-16 * std::abs(b) + 0.5 * t_tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a; fc = fa;
      d = b - a; e = d;
    }
  }
  return b;
}

double golden_min(const std::function<double(double)>& f, double a, double b, double t_tol) {
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > t_tol) {
    if (f1 <= f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

double Polynomial::value(const Vec& x) const {
  double acc = 0.0;
  for (const auto& t : terms) {
    double m = t.coeff;
    for (int i = 0; i < dim; ++i)
      for (int e = 0; e < t.exponents[i]; ++e) m *= x[i];
    acc += m;
  }
  return acc;
}

Vec Polynomial::gradient(const Vec& x) const {
  Vec g = Vec::Zero(dim);
  for (const auto& t : terms) {
    for (int k = 0; k < dim; ++k) {
      if (t.exponents[k] == 0) continue;
      double m = t.coeff * t.exponents[k];
      for (int i = 0; i < dim; ++i) {
        const int e = t.exponents[i] - (i == k ? 1 : 0);
        for (int j = 0; j < e; ++j) m *= x[i];
      }
      g[k] += m;
    }
  }
  return g;
}

Mat Polynomial::hessian(const Vec& x) const {
  Mat h = Mat::Zero(dim, dim);
  for (const auto& t : terms) {
    for (int k = 0; k < dim; ++k) {
      for (int l = 0; l < dim; ++l) {
        const double factor = (k == l) ? double(t.exponents[k]) * (t.exponents[k] - 1)
                                       : double(t.exponents[k]) * t.exponents[l];
        if (factor <= 0) continue;
        double m = t.coeff * factor;
        for (int i = 0; i < dim; ++i) {
          int e = t.exponents[i];
          if (i == k) e -= 1;
          if (i == l) e -= 1;
          for (int j = 0; j < e; ++j) m *= x[i];
        }
        h(k, l) += m;
      }
    }
  }
  return h;
}

std::uint64_t Rng::next() {
  // splitmix64
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
  const double u = (next() >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
  return lo + u * (hi - lo);
}

Vec Rng::uniform_vec(int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
  return v;
}

}  // namespace rjf
