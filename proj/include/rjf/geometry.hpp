#pragma once
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rjf/numerics.hpp"
#include "rjf/types.hpp"

namespace rjf {

// Riemannian data on a single coordinate chart. metric_derivs[k](i,j) is the
// partial derivative of g_ij along coordinate k; when a chart has no closed
// form, build_fd_metric_derivs supplies central differences with step h_g.
struct ChartGeometry {
  int dim = 2;
  std::string name;
  std::function<Mat(const Vec&)> metric;
  std::function<std::vector<Mat>(const Vec&)> metric_derivs;
  double h_g = 1e-5;
};

std::function<std::vector<Mat>(const Vec&)> build_fd_metric_derivs(
    std::function<Mat(const Vec&)> metric, int dim, double h_g);

// Oriented hypersurface Y = {rho = 0}. The sign of rho is arranged at load
// time so the trajectory's declared side has rho > 0; the unit normal
// N = grad(rho)/|grad(rho)|_g then points toward that side.
struct HypersurfaceSpec {
  std::string name;
  std::function<double(const Vec&)> rho;
  std::function<Vec(const Vec&)> grad_rho;  // coordinate partials of rho
  bool boundary = false;                    // Y is the boundary: transmission forbidden
};

// Potential with one-sided coordinate Hessians. hess_plus/hess_minus give the
// raw second partials d^2 V on the rho>0 / rho<0 sides; they coincide away
// from Y. grad is the coordinate gradient dV (index lowered).
struct PotentialSpec {
  std::string name;
  std::function<double(const Vec&)> v;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess_plus;
  std::function<Mat(const Vec&)> hess_minus;
  bool two_sided = false;
};

// Immutable bundle a path lives on.
struct Problem {
  ChartGeometry geom;
  std::optional<HypersurfaceSpec> surface;
  PotentialSpec potential;
  Tolerances tol;
};
using ProblemPtr = std::shared_ptr<const Problem>;

// --- chart-level operations -------------------------------------------------

Mat metric_at(const ChartGeometry& g, const Vec& x);
Mat metric_inverse_at(const ChartGeometry& g, const Vec& x);

// Christoffel symbols of the Levi-Civita connection; result[k](i,j) = Gamma^k_ij.
std::vector<Mat> christoffel(const ChartGeometry& g, const Vec& x);

// Curvature applied to vectors, R(u,v)w, with the sign fixed so that on the
// unit sphere R(u,v)u = v for orthonormal u,v; along a unit-speed geodesic the
// normal component of a linearized field then obeys w'' + w = 0.
Vec riemann(const ChartGeometry& g, const Vec& x, const Vec& u, const Vec& v, const Vec& w);

double inner(const ChartGeometry& g, const Vec& x, const Vec& u, const Vec& v);
double g_norm(const ChartGeometry& g, const Vec& x, const Vec& u);

// Gamma^k_ij u^i w^j contracted against precomputed symbols.
Vec gamma_apply(const std::vector<Mat>& gamma, const Vec& u, const Vec& w);

// --- hypersurface operations ------------------------------------------------

// Unit g-normal at x (defined near Y, not just on it).
Vec unit_normal(const ChartGeometry& g, const HypersurfaceSpec& s, const Vec& x);

// Splits w at a point y on Y into normal and tangential parts.
struct NormalSplit {
  Vec perp, top;
  double n_component;  // <w, N>_g
};
NormalSplit split_normal_tangent(const ChartGeometry& g, const HypersurfaceSpec& s,
                                 const Vec& y, const Vec& w, double tol_Y = 1e-9);

// Scalar second fundamental form II(u,v) = -<v, grad_u N>_g for u,v tangent
// to Y at y. With the inward normal of a circle (rho = r0 - |x|) this is +1
// for unit tangents.
double second_fundamental_form(const ChartGeometry& g, const HypersurfaceSpec& s,
                               const Vec& y, const Vec& u, const Vec& v,
                               double tangency_tol = 1e-10);

// Shape operator: tangential part of -grad_v N, so <shape(v), w>_g = II(v, w).
Vec shape_operator(const ChartGeometry& g, const HypersurfaceSpec& s, const Vec& y,
                   const Vec& v, double tangency_tol = 1e-10);

// --- potential operations ---------------------------------------------------

// grad V with the index raised: g^{-1} dV.
Vec potential_gradient_vec(const ChartGeometry& g, const PotentialSpec& p, const Vec& x);

// Covariant Hessian applied to w on the given side of Y:
// [Hess V w]^k = g^{kl} (d^2V_lj - Gamma^m_lj dV_m) w^j.
Vec potential_hessian_apply(const ChartGeometry& g, const PotentialSpec& p, const Vec& x,
                            const Vec& w, int side);

// --- registries -------------------------------------------------------------

ChartGeometry make_chart_euclidean(int dim);
ChartGeometry make_chart_polar_flat();
ChartGeometry make_chart_sphere_polar();
ChartGeometry make_chart_conformal(const Polynomial& phi, int dim);

HypersurfaceSpec make_surface_hyperplane(int dim, double c, int side);
HypersurfaceSpec make_surface_sphere_level(int dim, double r0, int side);
HypersurfaceSpec make_surface_polynomial(const Polynomial& rho, int side);

PotentialSpec make_potential_zero();
PotentialSpec make_potential_harmonic(double k);
PotentialSpec make_potential_polynomial(const Polynomial& v);
// Independent polynomials per side of Y, selected pointwise by the sign of
// rho; C^1 matching across Y is validated by validate_piecewise_c1 before use.
PotentialSpec make_potential_piecewise(const Polynomial& v_plus, const Polynomial& v_minus,
                                       std::function<double(const Vec&)> rho);

// Samples points on Y by root-finding along random rays from `center`;
// throws InputError if the surface cannot be sampled.
std::vector<Vec> sample_surface_points(const ChartGeometry& g, const HypersurfaceSpec& s,
                                       const Vec& center, double radius, int count,
                                       std::uint64_t seed);

// Checks value and gradient continuity of a two-sided polynomial potential
// across Y at sampled points; throws InputError on a C^1 violation.
void validate_piecewise_c1(const ChartGeometry& g, const HypersurfaceSpec& s,
                           const Polynomial& v_plus, const Polynomial& v_minus,
                           const Vec& center, double radius, std::uint64_t seed);

}  // namespace rjf
