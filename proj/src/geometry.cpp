#include "rjf/geometry.hpp"

#include <cmath>

namespace rjf {

std::function<std::vector<Mat>(const Vec&)> build_fd_metric_derivs(
    std::function<Mat(const Vec&)> metric, int dim, double h_g) {
  return [metric = std::move(metric), dim, h_g](const Vec& x) {
    std::vector<Mat> dg(dim);
    Vec xp = x, xm = x;
    for (int k = 0; k < dim; ++k) {
      xp[k] = x[k] + h_g;
      xm[k] = x[k] - h_g;
      dg[k] = (metric(xp) - metric(xm)) / (2.0 * h_g);
      xp[k] = x[k];
      xm[k] = x[k];
    }
    return dg;
  };
}

Mat metric_at(const ChartGeometry& g, const Vec& x) { return g.metric(x); }

Mat metric_inverse_at(const ChartGeometry& g, const Vec& x) {
  const Mat m = g.metric(x);
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::DegenerateMetric, "metric not positive definite at queried point");
  return llt.solve(Mat::Identity(g.dim, g.dim));
}

std::vector<Mat> christoffel(const ChartGeometry& g, const Vec& x) {
  const int n = g.dim;
  const Mat ginv = metric_inverse_at(g, x);
  const std::vector<Mat> dg = g.metric_derivs(x);
  std::vector<Mat> gamma(n, Mat::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l)
          s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        gamma[k](i, j) = 0.5 * s;
        gamma[k](j, i) = gamma[k](i, j);
      }
  return gamma;
}

Vec gamma_apply(const std::vector<Mat>& gamma, const Vec& u, const Vec& w) {
  const int n = static_cast<int>(gamma.size());
  Vec out(n);
  for (int k = 0; k < n; ++k) out[k] = u.dot(gamma[k] * w);
  return out;
}

Vec riemann(const ChartGeometry& g, const Vec& x, const Vec& u, const Vec& v, const Vec& w) {
  const int n = g.dim;
  const double h = g.h_g;
  const std::vector<Mat> gamma0 = christoffel(g, x);
  // dgamma[d][k](i,j) = partial_d Gamma^k_ij by central differences
  std::vector<std::vector<Mat>> dgamma(n);
  Vec xp = x, xm = x;
  for (int d = 0; d < n; ++d) {
    xp[d] = x[d] + h;
    xm[d] = x[d] - h;
    const std::vector<Mat> gp = christoffel(g, xp);
    const std::vector<Mat> gm = christoffel(g, xm);
    dgamma[d].resize(n);
    for (int k = 0; k < n; ++k) dgamma[d][k] = (gp[k] - gm[k]) / (2.0 * h);
    xp[d] = x[d];
    xm[d] = x[d];
  }
  // R(u,v)w^l = u^i v^j w^k [ d_j Gamma^l_ik - d_i Gamma^l_jk
  //                           + Gamma^l_jm Gamma^m_ik - Gamma^l_im Gamma^m_jk ]
  Vec out = Vec::Zero(n);
  for (int l = 0; l < n; ++l) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (u[i] == 0.0 && v[j] == 0.0) continue;
        for (int k = 0; k < n; ++k) {
          double term = dgamma[j][l](i, k) - dgamma[i][l](j, k);
          for (int m = 0; m < n; ++m)
            term += gamma0[l](j, m) * gamma0[m](i, k) - gamma0[l](i, m) * gamma0[m](j, k);
          acc += u[i] * v[j] * w[k] * term;
        }
      }
    out[l] = acc;
  }
  return out;
}

double inner(const ChartGeometry& g, const Vec& x, const Vec& u, const Vec& v) {
  return u.dot(g.metric(x) * v);
}

double g_norm(const ChartGeometry& g, const Vec& x, const Vec& u) {
  return std::sqrt(std::max(0.0, inner(g, x, u, u)));
}

Vec unit_normal(const ChartGeometry& g, const HypersurfaceSpec& s, const Vec& x) {
  const Vec dr = s.grad_rho(x);
  const Mat ginv = metric_inverse_at(g, x);
  const Vec nraw = ginv * dr;
  const double len = std::sqrt(dr.dot(nraw));
  if (!(len > 0.0))
    throw Error(ErrorCode::OffSurface, "degenerate level set: |grad rho|_g = 0");
  return nraw / len;
}

NormalSplit split_normal_tangent(const ChartGeometry& g, const HypersurfaceSpec& s,
                                 const Vec& y, const Vec& w, double tol_Y) {
  if (std::abs(s.rho(y)) >= tol_Y)
    throw Error(ErrorCode::OffSurface, "point is not on the hypersurface");
  const Vec N = unit_normal(g, s, y);
  NormalSplit out;
  out.n_component = inner(g, y, w, N);
  out.perp = out.n_component * N;
  out.top = w - out.perp;
  return out;
}

namespace {

// Covariant derivative of the unit normal field along direction u at y.
Vec covariant_normal_derivative(const ChartGeometry& g, const HypersurfaceSpec& s,
                                const Vec& y, const Vec& u) {
  const double h = g.h_g;
  const int n = g.dim;
  Vec dN = Vec::Zero(n);
  Vec xp, xm;
  for (int d = 0; d < n; ++d) {
    if (u[d] == 0.0) continue;
    xp = y;
    xm = y;
    xp[d] += h;
    xm[d] -= h;
    dN += u[d] * (unit_normal(g, s, xp) - unit_normal(g, s, xm)) / (2.0 * h);
  }
  const Vec N = unit_normal(g, s, y);
  return dN + gamma_apply(christoffel(g, y), u, N);
}

void require_tangent(const ChartGeometry& g, const HypersurfaceSpec& s, const Vec& y,
                     const Vec& u, double tol) {
  const Vec N = unit_normal(g, s, y);
  const double n_comp = inner(g, y, u, N);
  if (std::abs(n_comp) > tol * std::max(1.0, g_norm(g, y, u)))
    throw Error(ErrorCode::NotTangent, "vector is not tangent to the hypersurface");
}

}  // namespace

double second_fundamental_form(const ChartGeometry& g, const HypersurfaceSpec& s,
                               const Vec& y, const Vec& u, const Vec& v,
                               double tangency_tol) {
  if (std::abs(s.rho(y)) >= 1e-9)
    throw Error(ErrorCode::OffSurface, "point is not on the hypersurface");
  require_tangent(g, s, y, u, tangency_tol);
  require_tangent(g, s, y, v, tangency_tol);
  return -inner(g, y, v, covariant_normal_derivative(g, s, y, u));
}

Vec shape_operator(const ChartGeometry& g, const HypersurfaceSpec& s, const Vec& y,
                   const Vec& v, double tangency_tol) {
  if (std::abs(s.rho(y)) >= 1e-9)
    throw Error(ErrorCode::OffSurface, "point is not on the hypersurface");
  require_tangent(g, s, y, v, tangency_tol);
  const Vec dN = covariant_normal_derivative(g, s, y, v);
  const Vec N = unit_normal(g, s, y);
  // project out the (numerically tiny) normal component
  return -(dN - inner(g, y, dN, N) * N);
}

Vec potential_gradient_vec(const ChartGeometry& g, const PotentialSpec& p, const Vec& x) {
  return metric_inverse_at(g, x) * p.grad(x);
}

Vec potential_hessian_apply(const ChartGeometry& g, const PotentialSpec& p, const Vec& x,
                            const Vec& w, int side) {
  const Mat d2v = (side >= 0) ? p.hess_plus(x) : p.hess_minus(x);
  const Vec dv = p.grad(x);
  const std::vector<Mat> gamma = christoffel(g, x);
  const int n = g.dim;
  // covariant (0,2) Hessian applied to w, then index raised
  Vec lower(n);
  for (int l = 0; l < n; ++l) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      double h_lj = d2v(l, j);
      for (int m = 0; m < n; ++m) h_lj -= gamma[m](l, j) * dv[m];
      acc += h_lj * w[j];
    }
    lower[l] = acc;
  }
  return metric_inverse_at(g, x) * lower;
}

// --- registries -------------------------------------------------------------

ChartGeometry make_chart_euclidean(int dim) {
  ChartGeometry g;
  g.dim = dim;
  g.name = "euclidean";
  g.metric = [dim](const Vec&) { return Mat::Identity(dim, dim); };
  g.metric_derivs = [dim](const Vec&) { return std::vector<Mat>(dim, Mat::Zero(dim, dim)); };
  return g;
}

ChartGeometry make_chart_polar_flat() {
  ChartGeometry g;
  g.dim = 2;
  g.name = "polar-flat";
  g.metric = [](const Vec& x) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = x[0] * x[0];
    return m;
  };
  g.metric_derivs = [](const Vec& x) {
    std::vector<Mat> dg(2, Mat::Zero(2, 2));
    dg[0](1, 1) = 2.0 * x[0];
    return dg;
  };
  return g;
}

ChartGeometry make_chart_sphere_polar() {
  ChartGeometry g;
  g.dim = 2;
  g.name = "sphere-polar";
  g.metric = [](const Vec& x) {
    Mat m = Mat::Zero(2, 2);
    const double s = std::sin(x[0]);
    m(0, 0) = 1.0;
    m(1, 1) = s * s;
    return m;
  };
  g.metric_derivs = [](const Vec& x) {
    std::vector<Mat> dg(2, Mat::Zero(2, 2));
    dg[0](1, 1) = 2.0 * std::sin(x[0]) * std::cos(x[0]);
    return dg;
  };
  return g;
}

ChartGeometry make_chart_conformal(const Polynomial& phi, int dim) {
  ChartGeometry g;
  g.dim = dim;
  g.name = "conformal";
  g.metric = [phi, dim](const Vec& x) {
    return std::exp(2.0 * phi.value(x)) * Mat::Identity(dim, dim);
  };
  g.metric_derivs = [phi, dim](const Vec& x) {
    const double f = std::exp(2.0 * phi.value(x));
    const Vec dphi = phi.gradient(x);
    std::vector<Mat> dg(dim);
    for (int k = 0; k < dim; ++k) dg[k] = 2.0 * dphi[k] * f * Mat::Identity(dim, dim);
    return dg;
  };
  return g;
}

HypersurfaceSpec make_surface_hyperplane(int dim, double c, int side) {
  HypersurfaceSpec s;
  s.name = "hyperplane";
  const double sg = side >= 0 ? 1.0 : -1.0;
  s.rho = [c, sg](const Vec& x) { return sg * (x[0] - c); };
  s.grad_rho = [dim, sg](const Vec&) {
    Vec g = Vec::Zero(dim);
    g[0] = sg;
    return g;
  };
  return s;
}

HypersurfaceSpec make_surface_sphere_level(int dim, double r0, int side) {
  HypersurfaceSpec s;
  s.name = "sphere-level";
  const double sg = side >= 0 ? 1.0 : -1.0;
  s.rho = [r0, sg](const Vec& x) { return sg * (r0 - x.norm()); };
  s.grad_rho = [sg, dim](const Vec& x) {
    const double r = x.norm();
    if (r < 1e-14) return Vec(Vec::Zero(dim));
    return Vec(-sg * x / r);
  };
  return s;
}

HypersurfaceSpec make_surface_polynomial(const Polynomial& rho, int side) {
  HypersurfaceSpec s;
  s.name = "polynomial";
  const double sg = side >= 0 ? 1.0 : -1.0;
  s.rho = [rho, sg](const Vec& x) { return sg * rho.value(x); };
  s.grad_rho = [rho, sg](const Vec& x) { return Vec(sg * rho.gradient(x)); };
  return s;
}

PotentialSpec make_potential_zero() {
  PotentialSpec p;
  p.name = "zero";
  p.v = [](const Vec&) { return 0.0; };
  p.grad = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  p.hess_plus = [](const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); };
  p.hess_minus = p.hess_plus;
  return p;
}

PotentialSpec make_potential_harmonic(double k) {
  PotentialSpec p;
  p.name = "harmonic";
  p.v = [k](const Vec& x) { return 0.5 * k * x.squaredNorm(); };
  p.grad = [k](const Vec& x) { return Vec(k * x); };
  p.hess_plus = [k](const Vec& x) { return Mat(k * Mat::Identity(x.size(), x.size())); };
  p.hess_minus = p.hess_plus;
  return p;
}

PotentialSpec make_potential_polynomial(const Polynomial& v) {
  PotentialSpec p;
  p.name = "polynomial";
  p.v = [v](const Vec& x) { return v.value(x); };
  p.grad = [v](const Vec& x) { return v.gradient(x); };
  p.hess_plus = [v](const Vec& x) { return v.hessian(x); };
  p.hess_minus = p.hess_plus;
  return p;
}

PotentialSpec make_potential_piecewise(const Polynomial& v_plus, const Polynomial& v_minus,
                                       std::function<double(const Vec&)> rho) {
  PotentialSpec p;
  p.name = "piecewise-polynomial";
  p.two_sided = true;
  // branch selection by the side of Y; the C1 matching across Y makes value
  // and gradient well defined there
  p.v = [v_plus, v_minus, rho](const Vec& x) {
    return rho(x) >= 0 ? v_plus.value(x) : v_minus.value(x);
  };
  p.grad = [v_plus, v_minus, rho](const Vec& x) {
    return rho(x) >= 0 ? v_plus.gradient(x) : v_minus.gradient(x);
  };
  p.hess_plus = [v_plus](const Vec& x) { return v_plus.hessian(x); };
  p.hess_minus = [v_minus](const Vec& x) { return v_minus.hessian(x); };
  return p;
}

std::vector<Vec> sample_surface_points(const ChartGeometry& g, const HypersurfaceSpec& s,
                                       const Vec& center, double radius, int count,
                                       std::uint64_t seed) {
  (void)g;
  Rng rng(seed);
  std::vector<Vec> points;
  const int n = static_cast<int>(center.size());
  int attempts = 0;
  while (static_cast<int>(points.size()) < count && attempts < 200 * count) {
    ++attempts;
    Vec dir = rng.uniform_vec(n, -1.0, 1.0);
    if (dir.norm() < 1e-8) continue;
    dir.normalize();
    const Vec base = center + rng.uniform_vec(n, -0.3 * radius, 0.3 * radius);
    const auto f = [&](double t) { return s.rho(base + t * dir); };
    double t_prev = 0.0, f_prev = f(0.0);
    const int substeps = 64;
    for (int i = 1; i <= substeps; ++i) {
      const double t = radius * i / substeps;
      const double ft = f(t);
      if (f_prev == 0.0 || (f_prev > 0) != (ft > 0)) {
        const double root = brent_root(f, t_prev, t, f_prev, ft, 1e-14);
        points.push_back(base + root * dir);
        break;
      }
      t_prev = t;
      f_prev = ft;
    }
  }
  if (static_cast<int>(points.size()) < count)
    throw Error(ErrorCode::InputError, "could not sample enough points on the hypersurface");
  return points;
}

void validate_piecewise_c1(const ChartGeometry& g, const HypersurfaceSpec& s,
                           const Polynomial& v_plus, const Polynomial& v_minus,
                           const Vec& center, double radius, std::uint64_t seed) {
  const auto points = sample_surface_points(g, s, center, radius, 16, seed);
  for (const Vec& y : points) {
    const double dv = std::abs(v_plus.value(y) - v_minus.value(y));
    const double dgrad = (v_plus.gradient(y) - v_minus.gradient(y)).norm();
    if (dv > 1e-10 || dgrad > 1e-10)
      throw Error(ErrorCode::InputError,
                  "piecewise potential violates C1 matching across the hypersurface");
  }
}

}  // namespace rjf
