#include "rjf/jacobi.hpp"

#include <algorithm>
#include <cmath>

namespace rjf {

namespace {

int piece_index(const std::vector<JacobiField::Piece>& pieces, double t, Side side) {
  const int m = static_cast<int>(pieces.size());
  for (int i = 0; i < m - 1; ++i)
    if (side == Side::Plus ? (t < pieces[i].t1) : (t <= pieces[i].t1)) return i;
  return m - 1;
}

// Jacobi equation right-hand side along a stored path segment:
// W' = U - Gamma(v, W),  U' = -R(v, W)v - HessV W - Gamma(v, U).
OdeRhs jacobi_rhs(const ProblemPtr& pr, const PathSegment& seg) {
  return [pr, &seg](double t, const Vec& y, Vec& dydt) {
    const int n = pr->geom.dim;
    const Vec state = seg.sol.eval(std::clamp(t, seg.t0, seg.t1));
    const Vec x = state.head(n), v = state.tail(n);
    const Vec W = y.head(n), U = y.tail(n);
    const auto gamma = christoffel(pr->geom, x);
    dydt.resize(2 * n);
    dydt.head(n) = U - gamma_apply(gamma, v, W);
    dydt.tail(n) = -riemann(pr->geom, x, v, W, v) -
                   potential_hessian_apply(pr->geom, pr->potential, x, W, seg.side) -
                   gamma_apply(gamma, v, U);
  };
}

}  // namespace

Vec JacobiField::W(double t, Side side) const {
  const auto& p = pieces_[piece_index(pieces_, t, side)];
  const int n = problem_->geom.dim;
  return p.sol.eval(std::clamp(t, p.t0, p.t1)).head(n);
}

Vec JacobiField::U(double t, Side side) const {
  const auto& p = pieces_[piece_index(pieces_, t, side)];
  const int n = problem_->geom.dim;
  return p.sol.eval(std::clamp(t, p.t0, p.t1)).tail(n);
}

JacobiJump jacobi_jump(const Problem& pr, const EventRecord& ev, const Vec& W_minus,
                       const Vec& U_minus, double jump_perturbation) {
  JacobiJump j;
  j.time = ev.time;
  j.W_minus = W_minus;
  j.U_minus = U_minus;
  if (ev.kind == EventKind::Kink) {
    j.W_plus = W_minus;
    j.U_plus = U_minus;
    j.delta_c = Vec::Zero(W_minus.size());
    return j;
  }
  const auto& g = pr.geom;
  const auto& s = *pr.surface;
  const Vec& y = ev.point;
  const Vec N = unit_normal(g, s, y);

  const double a1 = inner(g, y, ev.v_in, N);
  if (std::abs(a1) <= pr.tol.v_min)
    throw Error(ErrorCode::Tangency, "tangential reflection in linearized jump");
  const Vec v_top = ev.v_in - a1 * N;

  const double w1 = inner(g, y, W_minus, N);
  const Vec W_top = W_minus - w1 * N;
  j.delta_c = -(w1 / a1) * v_top + W_top;

  // mirror map on the field value
  j.W_plus = W_top - w1 * N;

  const Vec S_dc = shape_operator(g, s, y, j.delta_c, 1e-6);
  const double II_dc_vtop = inner(g, y, S_dc, v_top);
  const double grad_v_n = inner(g, y, potential_gradient_vec(g, pr.potential, y), N);

  const double u1_minus = inner(g, y, U_minus, N);
  const Vec U_top_minus = U_minus - u1_minus * N;
  Vec U_top_plus = U_top_minus + 2.0 * a1 * S_dc;
  if (jump_perturbation != 0.0) {
    // pick a robust tangent direction at y for the deliberate defect
    const int n = static_cast<int>(y.size());
    Vec dir = Vec::Zero(n);
    double best = -1.0;
    for (int k = 0; k < n; ++k) {
      Vec e = Vec::Zero(n);
      e[k] = 1.0;
      Vec tang = e - inner(g, y, e, N) * N;
      const double nm = g_norm(g, y, tang);
      if (nm > best) {
        best = nm;
        dir = tang / std::max(nm, 1e-300);
      }
    }
    U_top_plus += jump_perturbation * dir;
  }
  const double u1_mean = -(w1 / a1) * grad_v_n + II_dc_vtop;
  const double u1_plus = 2.0 * u1_mean - u1_minus;
  j.U_plus = U_top_plus + u1_plus * N;
  return j;
}

double JumpResiduals::max() const {
  return std::max({top_membership, perp_membership, du_top, du_perp, kink_w, kink_u});
}

JumpResiduals jump_residuals(const Problem& pr, const EventRecord& ev, const JacobiJump& j) {
  JumpResiduals r;
  const auto& g = pr.geom;
  if (ev.kind == EventKind::Kink) {
    r.kink_w = g_norm(g, ev.point, j.W_plus - j.W_minus);
    r.kink_u = g_norm(g, ev.point, j.U_plus - j.U_minus);
    return r;
  }
  const auto& s = *pr.surface;
  const Vec& y = ev.point;
  const Vec N = unit_normal(g, s, y);
  const double a1 = inner(g, y, ev.v_in, N);
  const Vec v_top = ev.v_in - a1 * N;

  const auto split = [&](const Vec& w) {
    const double wn = inner(g, y, w, N);
    return std::make_pair(wn, Vec(w - wn * N));
  };

  const auto [w1m, Wtm] = split(j.W_minus);
  const auto [w1p, Wtp] = split(j.W_plus);
  r.top_membership = g_norm(g, y, Wtp - Wtm);
  r.perp_membership = std::abs(0.5 * (w1p + w1m));

  // recompute delta_c from the minus data
  const Vec dc = -(w1m / a1) * v_top + Wtm;
  const Vec S_dc = shape_operator(g, s, y, dc, 1e-6);

  const auto [u1m, Utm] = split(j.U_minus);
  const auto [u1p, Utp] = split(j.U_plus);
  r.du_top = g_norm(g, y, Vec(Utp - Utm - 2.0 * a1 * S_dc));
  const double grad_v_n = inner(g, y, potential_gradient_vec(g, pr.potential, y), N);
  r.du_perp = std::abs(0.5 * (u1p + u1m) + (w1m / a1) * grad_v_n -
                       inner(g, y, S_dc, v_top));
  return r;
}

JacobiField propagate_jacobi(const ReflectedPath& path, const Vec& W0, const Vec& U0,
                             double t_from, double t_to, const JacobiOptions& opts) {
  const ProblemPtr& pr = path.problem;
  const int n = pr->geom.dim;
  std::vector<JacobiField::Piece> pieces;
  std::vector<JacobiJump> jumps;

  Vec y(2 * n);
  y << W0, U0;
  double t = t_from;

  OdeOptions oo;
  oo.rtol = opts.rtol;
  oo.atol = opts.atol;

  const size_t first_seg = static_cast<size_t>(path.segment_index(t_from, Side::Plus));
  for (size_t si = first_seg; si < path.segments.size() && t < t_to - 1e-14; ++si) {
    const auto& seg = path.segments[si];
    const double t_stop = std::min(seg.t1, t_to);
    if (t_stop > t + 1e-15) {
      Dopri5 stepper(jacobi_rhs(pr, seg), t, y, t_stop, oo);
      while (!stepper.done()) stepper.step();
      y = stepper.y();
      JacobiField::Piece piece;
      piece.t0 = t;
      piece.t1 = t_stop;
      piece.sol = stepper.take_solution();
      pieces.push_back(std::move(piece));
      t = t_stop;
    }
    // apply the jump if an event separates this segment from the next
    if (si + 1 < path.segments.size() && si < path.events.size() &&
        path.events[si].time < t_to - 1e-14) {
      const auto& ev = path.events[si];
      JacobiJump j = jacobi_jump(*pr, ev, y.head(n), y.tail(n), opts.jump_perturbation);
      j.event_index = static_cast<int>(si);
      y << j.W_plus, j.U_plus;
      jumps.push_back(std::move(j));
    }
  }
  if (pieces.empty()) {
    // degenerate window: represent as a constant piece
    JacobiField::Piece piece;
    piece.t0 = t_from;
    piece.t1 = t_to;
    OdeStep st;
    st.t0 = t_from;
    st.h = std::max(t_to - t_from, 1e-300);
    st.r1 = y;
    st.r2 = st.r3 = st.r4 = st.r5 = Vec::Zero(2 * n);
    piece.sol.t_begin = t_from;
    piece.sol.t_end = t_to;
    piece.sol.steps.push_back(std::move(st));
    pieces.push_back(std::move(piece));
  }
  return JacobiField(pr, std::move(pieces), std::move(jumps));
}

JacobiField propagate_jacobi(const ReflectedPath& path, const Vec& W0, const Vec& U0,
                             const JacobiOptions& opts) {
  return propagate_jacobi(path, W0, U0, 0.0, path.total_time, opts);
}

std::vector<JacobiField> propagate_full_basis(const ReflectedPath& path, double t_from,
                                              double t_to, const JacobiOptions& opts) {
  const int n = path.dim();
  std::vector<JacobiField> fields;
  fields.reserve(2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    Vec W0 = Vec::Zero(n), U0 = Vec::Zero(n);
    if (i < n)
      W0[i] = 1.0;
    else
      U0[i - n] = 1.0;
    fields.push_back(propagate_jacobi(path, W0, U0, t_from, t_to, opts));
  }
  return fields;
}

std::vector<JacobiField> propagate_velocity_basis(const ReflectedPath& path, double t_from,
                                                  double t_to, const JacobiOptions& opts) {
  const int n = path.dim();
  std::vector<JacobiField> fields;
  fields.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vec U0 = Vec::Zero(n);
    U0[i] = 1.0;
    fields.push_back(propagate_jacobi(path, Vec::Zero(n), U0, t_from, t_to, opts));
  }
  return fields;
}

Mat basis_matrix(const std::vector<JacobiField>& fields, double t, Side side) {
  const int n = static_cast<int>(fields.front().W(t, side).size());
  Mat m(2 * n, static_cast<int>(fields.size()));
  for (size_t i = 0; i < fields.size(); ++i) {
    m.col(i).head(n) = fields[i].W(t, side);
    m.col(i).tail(n) = fields[i].U(t, side);
  }
  return m;
}

Mat basis_W(const std::vector<JacobiField>& fields, double t, Side side) {
  const int n = static_cast<int>(fields.front().W(t, side).size());
  Mat m(n, static_cast<int>(fields.size()));
  for (size_t i = 0; i < fields.size(); ++i) m.col(i) = fields[i].W(t, side);
  return m;
}

EndpointMap endpoint_map(const ReflectedPath& path, const JacobiOptions& opts) {
  const auto fields = propagate_full_basis(path, 0.0, path.total_time, opts);
  EndpointMap em;
  em.phi = basis_matrix(fields, path.total_time, Side::Minus);
  return em;
}

Mat flow_jacobian(const ReflectedPath& path, const JacobiOptions& opts) {
  const int n = path.dim();
  const auto& g = path.problem->geom;
  const EndpointMap em = endpoint_map(path, opts);

  // C(x,v): (W, U) -> (dx, dv) with dv = U - Gamma(v, W)
  const auto correction = [&](const Vec& x, const Vec& v) {
    const auto gamma = christoffel(g, x);
    Mat G(n, n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) G(k, j) = v.dot(gamma[k].col(j));
    Mat c = Mat::Identity(2 * n, 2 * n);
    c.bottomLeftCorner(n, n) = -G;
    return c;
  };
  const Vec x0 = path.position(0.0), v0 = path.velocity(0.0);
  const Vec xT = path.position(path.total_time, Side::Minus);
  const Vec vT = path.velocity(path.total_time, Side::Minus);
  Mat c0_inv = Mat::Identity(2 * n, 2 * n);
  {
    const auto gamma = christoffel(g, x0);
    Mat G(n, n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) G(k, j) = v0.dot(gamma[k].col(j));
    c0_inv.bottomLeftCorner(n, n) = G;
  }
  return correction(xT, vT) * em.phi * c0_inv;
}

int ConjugateScan::total_multiplicity_interior(double T) const {
  int total = 0;
  for (const auto& c : points)
    if (c.time < T - 1e-9) total += c.multiplicity;
  return total;
}

ConjugateScan conjugate_points(const ReflectedPath& path, double grid_dt, double tol_rank,
                               const JacobiOptions& opts) {
  const double T = path.total_time;
  if (grid_dt <= 0.0) grid_dt = T / 2000.0;
  const auto fields = propagate_velocity_basis(path, 0.0, T, opts);

  const auto B_of = [&](double t, Side side = Side::Plus) { return basis_W(fields, t, side); };
  // Reflections multiply the field values by the mirror map (determinant -1),
  // so the raw det B flips sign at every reflection without B being singular;
  // folding in the parity restores a continuous scan function.
  std::vector<double> reflection_times;
  for (const auto& ev : path.events)
    if (ev.kind == EventKind::Reflection) reflection_times.push_back(ev.time);
  const auto parity = [&](double t) {
    int count = 0;
    for (double rt : reflection_times)
      if (rt <= t) ++count;
    return (count % 2 == 0) ? 1.0 : -1.0;
  };
  const auto det_of = [&](double t) { return parity(t) * B_of(t).determinant(); };
  const auto sigma_min_of = [&](double t) {
    Eigen::JacobiSVD<Mat> svd(B_of(t));
    return svd.singularValues().minCoeff();
  };

  ConjugateScan scan;
  const int cells = std::max(16, static_cast<int>(std::ceil(T / grid_dt)));
  std::vector<double> ts(cells + 1), dets(cells + 1);
  for (int i = 0; i <= cells; ++i) {
    ts[i] = T * i / cells;
    dets[i] = det_of(ts[i]);
    scan.det_samples.emplace_back(ts[i], dets[i]);
    Eigen::JacobiSVD<Mat> svd(B_of(ts[i]));
    scan.sigma_ref = std::max(scan.sigma_ref, svd.singularValues().maxCoeff());
    scan.det_scale = std::max(scan.det_scale, std::abs(dets[i]));
  }

  const double t_floor = 1e-8;
  std::vector<ConjugatePoint> found;

  const auto multiplicity_at = [&](double t) {
    Eigen::JacobiSVD<Mat> svd(B_of(t));
    const auto sv = svd.singularValues();
    int mult = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] < tol_rank * scan.sigma_ref) ++mult;
    return mult;
  };

  // sign-change roots
  for (int i = 0; i < cells; ++i) {
    if (ts[i + 1] <= t_floor) continue;
    if ((dets[i] > 0) != (dets[i + 1] > 0)) {
      const double t_star =
          brent_root(det_of, ts[i], ts[i + 1], dets[i], dets[i + 1], 1e-10);
      if (t_star <= t_floor) continue;
      ConjugatePoint c;
      c.time = t_star;
      c.multiplicity = std::max(1, multiplicity_at(t_star));
      c.sign_change = true;
      found.push_back(c);
    }
  }

  // even-order dips: local minima of |det| that refine to (numerically) zero
  for (int i = 1; i < cells; ++i) {
    const double adet = std::abs(dets[i]);
    if (ts[i] <= t_floor) continue;
    if (adet >= std::abs(dets[i - 1]) || adet >= std::abs(dets[i + 1])) continue;
    if ((dets[i - 1] > 0) != (dets[i + 1] > 0)) continue;  // handled by sign change
    if (adet > 1e-2 * scan.det_scale) continue;
    const double t_star = golden_min([&](double t) { return sigma_min_of(t); }, ts[i - 1],
                                     ts[i + 1], 1e-11);
    if (std::abs(det_of(t_star)) < 1e-12 * scan.det_scale) {
      const int mult = multiplicity_at(t_star);
      if (mult == 0) continue;
      if (mult % 2 == 1)
        throw Error(ErrorCode::RefineGrid,
                    "odd-multiplicity zero without sign change: scan grid too coarse");
      ConjugatePoint c;
      c.time = t_star;
      c.multiplicity = mult;
      c.sign_change = false;
      found.push_back(c);
    }
  }

  std::sort(found.begin(), found.end(),
            [](const ConjugatePoint& a, const ConjugatePoint& b) { return a.time < b.time; });
  // merge duplicates from adjacent cells
  for (const auto& c : found) {
    if (!scan.points.empty() && std::abs(scan.points.back().time - c.time) < 1e-8) continue;
    scan.points.push_back(c);
  }

  // endpoint conjugacy
  Eigen::JacobiSVD<Mat> svd_end(B_of(T, Side::Minus));
  const auto sv = svd_end.singularValues();
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] < tol_rank * scan.sigma_ref) ++scan.endpoint_multiplicity;
  scan.endpoint_conjugate = scan.endpoint_multiplicity > 0;
  return scan;
}

double self_conjugacy_ratio(const ReflectedPath& path, const JacobiOptions& opts) {
  const auto fields = propagate_velocity_basis(path, 0.0, path.total_time, opts);
  Eigen::JacobiSVD<Mat> svd(basis_W(fields, path.total_time, Side::Minus));
  const auto sv = svd.singularValues();
  const double smax = sv.maxCoeff();
  if (smax <= 0) return 0.0;
  return sv.minCoeff() / smax;
}

double variation_consistency_check(const ReflectedPath& path, const EventPolicy& policy,
                                   const Vec& W0, const Vec& U0, double eps, int samples) {
  const ProblemPtr& pr = path.problem;
  const Vec x0 = path.position(0.0), v0 = path.velocity(0.0);
  // coordinate velocity perturbation matching the covariant initial data
  const Vec dv = U0 - gamma_apply(christoffel(pr->geom, x0), v0, W0);

  const ReflectedPath varied = shoot(pr, x0 + eps * W0, v0 + eps * dv, path.total_time, policy);
  const JacobiField field = propagate_jacobi(path, W0, U0);

  std::vector<double> excluded;
  for (const auto& ev : path.events) excluded.push_back(ev.time);
  for (const auto& ev : varied.events) excluded.push_back(ev.time);

  double sup = 0.0;
  for (int i = 1; i < samples; ++i) {
    const double t = path.total_time * i / samples;
    bool skip = false;
    for (double te : excluded)
      if (std::abs(t - te) < 10.0 * eps) skip = true;
    if (skip) continue;
    const Vec fd = (varied.position(t) - path.position(t)) / eps;
    sup = std::max(sup, (fd - field.W(t)).norm());
  }
  return sup;
}

}  // namespace rjf
