#include "rjf/index_form.hpp"

#include <algorithm>
#include <cmath>

namespace rjf {

Vec VariationField::residual(double t) const {
  (void)t;
  return Vec();
}

Vec AnalyticField::deriv(double t, Side side) const {
  const auto& pr = *path_->problem;
  const Vec x = path_->position(t, side), v = path_->velocity(t, side);
  return wdot_(t) + gamma_apply(christoffel(pr.geom, x), v, w_(t));
}

Vec AnalyticField::residual(double t) const {
  const auto& pr = *path_->problem;
  const int si = path_->segment_index(t);
  const auto& seg = path_->segments[si];
  const double h = 1e-6;
  const double ta = std::max(t - h, seg.t0), tb = std::min(t + h, seg.t1);
  const Vec du = (deriv(tb, Side::Plus) - deriv(ta, Side::Plus)) / (tb - ta);
  const Vec x = path_->position(t), v = path_->velocity(t);
  const Vec dt2w = du + gamma_apply(christoffel(pr.geom, x), v, deriv(t, Side::Plus));
  return dt2w + riemann(pr.geom, x, v, w_(t), v) +
         potential_hessian_apply(pr.geom, pr.potential, x, w_(t), seg.side);
}

// --- BrokenJacobiSpace -------------------------------------------------------

BrokenJacobiSpace::BrokenJacobiSpace(const ReflectedPath& path, int k, BoundaryCondition bc)
    : path_(&path), bc_(bc), n_(path.dim()), k_(k) {
  if (k < 2) throw Error(ErrorCode::InputError, "need at least two break cells");
  const double T = path.total_time;
  const double cell = T / k;
  nodes_.resize(k + 1);
  for (int j = 0; j <= k; ++j) nodes_[j] = T * j / k;
  // nudge interior nodes off event times (at most half a cell)
  for (int j = 1; j < k; ++j) {
    for (const auto& ev : path.events) {
      if (std::abs(nodes_[j] - ev.time) < 0.1 * cell) {
        const double shifted = ev.time + (nodes_[j] >= ev.time ? 0.25 : -0.25) * cell;
        nodes_[j] = std::clamp(shifted, nodes_[j - 1] + 0.2 * cell, T - 0.2 * cell);
      }
    }
  }

  spans_.reserve(k);
  for (int s = 0; s < k; ++s) {
    Span sp;
    sp.a = nodes_[s];
    sp.b = nodes_[s + 1];
    sp.basis = propagate_full_basis(path, sp.a, sp.b);
    sp.wu_b = basis_matrix(sp.basis, sp.b, Side::Minus);
    sp.a_block = sp.wu_b.topLeftCorner(n_, n_);
    sp.b_block_lu = Eigen::PartialPivLU<Mat>(Mat(sp.wu_b.topRightCorner(n_, n_)));
    spans_.push_back(std::move(sp));
  }

  // term sites: events first, then interior nodes, sorted by time
  for (size_t e = 0; e < path.events.size(); ++e)
    sites_.push_back({path.events[e].time, static_cast<int>(e), false});
  for (int j = 1; j < k; ++j) sites_.push_back({nodes_[j], -1, true});
  std::sort(sites_.begin(), sites_.end(),
            [](const Site& a, const Site& b) { return a.time < b.time; });

  const Mat ident = Mat::Identity(2 * n_, 2 * n_);
  for (const auto& site : sites_) {
    if (site.is_node) {
      const int j = static_cast<int>(
          std::lower_bound(nodes_.begin(), nodes_.end(), site.time - 1e-15) - nodes_.begin());
      site_span_minus_.push_back(j - 1);
      site_span_plus_.push_back(j);
      site_minus_.push_back(spans_[j - 1].wu_b);
      site_plus_.push_back(ident);
    } else {
      int s = 0;
      while (s + 1 < k && nodes_[s + 1] <= site.time) ++s;
      site_span_minus_.push_back(s);
      site_span_plus_.push_back(s);
      site_minus_.push_back(basis_matrix(spans_[s].basis, site.time, Side::Minus));
      site_plus_.push_back(basis_matrix(spans_[s].basis, site.time, Side::Plus));
    }
  }
}

int BrokenJacobiSpace::dim() const {
  return bc_ == BoundaryCondition::Fixed ? n_ * (k_ - 1) : n_ * k_;
}

Vec BrokenJacobiSpace::node_value(const Vec& q, int j) const {
  if (j == 0 || j == k_) {
    if (bc_ == BoundaryCondition::Fixed) return Vec::Zero(n_);
    return q.segment((k_ - 1) * n_, n_);
  }
  return q.segment((j - 1) * n_, n_);
}

Vec BrokenJacobiSpace::span_coeff(const Vec& q, int s) const {
  const Vec wa = node_value(q, s);
  const Vec wb = node_value(q, s + 1);
  Vec c(2 * n_);
  c.head(n_) = wa;
  c.tail(n_) = spans_[s].b_block_lu.solve(wb - spans_[s].a_block * wa);
  return c;
}

BrokenJacobiSpace::Samples BrokenJacobiSpace::sample(const Vec& q) const {
  Samples out;
  std::vector<Vec> coeff(k_);
  for (int s = 0; s < k_; ++s) coeff[s] = span_coeff(q, s);

  const size_t ns = sites_.size();
  out.w_minus.resize(ns);
  out.w_plus.resize(ns);
  out.u_minus.resize(ns);
  out.u_plus.resize(ns);
  for (size_t i = 0; i < ns; ++i) {
    const Vec vm = site_minus_[i] * coeff[site_span_minus_[i]];
    const Vec vp = site_plus_[i] * coeff[site_span_plus_[i]];
    out.w_minus[i] = vm.head(n_);
    out.u_minus[i] = vm.tail(n_);
    out.w_plus[i] = vp.head(n_);
    out.u_plus[i] = vp.tail(n_);
  }
  out.w_begin = node_value(q, 0);
  out.u_begin = coeff[0].tail(n_);
  const Vec end_vals = spans_[k_ - 1].wu_b * coeff[k_ - 1];
  out.w_end = end_vals.head(n_);
  out.u_end = end_vals.tail(n_);
  return out;
}

Vec BrokenJacobiSpace::span_value(const Vec& q, int s, double t, Side side, bool deriv) const {
  const Vec c = span_coeff(q, s);
  const auto& sp = spans_[s];
  const double tc = std::clamp(t, sp.a, sp.b);
  Vec out = Vec::Zero(n_);
  for (int i = 0; i < 2 * n_; ++i) {
    if (c[i] == 0.0) continue;
    out += c[i] * (deriv ? sp.basis[i].U(tc, side) : sp.basis[i].W(tc, side));
  }
  return out;
}

Vec BrokenJacobiSpace::coords_of(const JacobiField& f) const {
  Vec q = Vec::Zero(dim());
  for (int j = 1; j < k_; ++j) q.segment((j - 1) * n_, n_) = f.W(nodes_[j]);
  if (bc_ == BoundaryCondition::Periodic) q.segment((k_ - 1) * n_, n_) = f.W(0.0, Side::Plus);
  return q;
}

void BrokenJacobiSpace::validate_spans() const {
  for (int s = 0; s < k_; ++s) {
    const auto& sp = spans_[s];
    // endpoint solvability
    Eigen::JacobiSVD<Mat> svd(sp.wu_b.topRightCorner(n_, n_));
    const auto sv = svd.singularValues();
    if (sv.minCoeff() < 1e-9 * sv.maxCoeff())
      throw Error(ErrorCode::RefineNodes, "break cell endpoints are conjugate: refine nodes");
    // no interior conjugate pair: parity-corrected det of the velocity block
    std::vector<double> refl;
    for (const auto& ev : path_->events)
      if (ev.kind == EventKind::Reflection && ev.time > sp.a && ev.time < sp.b)
        refl.push_back(ev.time);
    auto det_at = [&](double t) {
      Mat wu(n_, n_);
      const Mat full = basis_matrix(sp.basis, t, Side::Plus);
      wu = full.topRightCorner(n_, n_);
      double parity = 1.0;
      for (double rt : refl)
        if (rt <= t) parity = -parity;
      return parity * wu.determinant();
    };
    const int probes = 64;
    double scale = 0.0;
    std::vector<double> dets(probes);
    for (int i = 1; i <= probes; ++i) {
      dets[i - 1] = det_at(sp.a + (sp.b - sp.a) * i / probes);
      scale = std::max(scale, std::abs(dets[i - 1]));
    }
    for (int i = 1; i < probes; ++i) {
      if ((dets[i - 1] > 0) != (dets[i] > 0))
        throw Error(ErrorCode::RefineNodes, "conjugate pair inside a break cell: refine nodes");
      if (i + 1 < probes && std::abs(dets[i]) < 1e-10 * scale)
        throw Error(ErrorCode::RefineNodes, "near-conjugate point inside a break cell");
    }
  }
}

// --- second variation --------------------------------------------------------

namespace {

struct SiteTermContext {
  const ReflectedPath* path;
};

// Reflection boundary term of the second variation at one event, from the
// one-sided samples of the two fields.
double reflection_term(const Problem& pr, const EventRecord& ev, const Vec& Wm, const Vec& Um,
                       const Vec& Up, const Vec& Zm, const Vec& Zp) {
  const auto& g = pr.geom;
  const Vec& y = ev.point;
  const Vec N = unit_normal(g, *pr.surface, y);
  const double a1 = inner(g, y, ev.v_in, N);
  const Vec v_top = ev.v_in - a1 * N;
  const double gradv1 = inner(g, y, potential_gradient_vec(g, pr.potential, y), N);

  const double w1m = inner(g, y, Wm, N);
  const Vec w_top_m = Wm - w1m * N;
  const Vec dc = -(w1m / a1) * v_top + w_top_m;
  const Vec s_dc = shape_operator(g, *pr.surface, y, dc, 1e-6);
  const double ii_dc_vtop = inner(g, y, s_dc, v_top);

  const Vec du = Up - Um;
  const Vec ubar = 0.5 * (Up + Um);
  const double ubar1 = inner(g, y, ubar, N);
  const Vec zbar = 0.5 * (Zp + Zm);
  const double z1m = inner(g, y, Zm, N);

  return -inner(g, y, du, zbar) + 2.0 * ubar1 * z1m + 2.0 * w1m * (z1m / a1) * gradv1 +
         2.0 * a1 * inner(g, y, s_dc, zbar) - 2.0 * ii_dc_vtop * z1m;
}

double kink_term(const Problem& pr, const Vec& x, const Vec& Um, const Vec& Up, const Vec& Zm,
                 const Vec& Zp) {
  return -inner(pr.geom, x, Vec(Up - Um), Vec(0.5 * (Zp + Zm)));
}

}  // namespace

double second_variation(const ReflectedPath& path, const VariationField& W,
                        const VariationField& Z, BoundaryCondition bc) {
  const auto& pr = *path.problem;
  const double T = path.total_time;

  // admissibility of both fields
  for (const VariationField* f : {&W, &Z}) {
    const Vec v0 = f->value(0.0, Side::Plus), vT = f->value(T, Side::Minus);
    const double scale = std::max({1.0, v0.norm(), vT.norm()});
    if (bc == BoundaryCondition::Fixed) {
      if (v0.norm() > 1e-8 * scale || vT.norm() > 1e-8 * scale)
        throw Error(ErrorCode::InvalidField, "field does not vanish at the endpoints");
    } else {
      if ((v0 - vT).norm() > 1e-8 * scale)
        throw Error(ErrorCode::InvalidField, "field endpoint values differ");
    }
    for (const auto& ev : path.events) {
      const Vec fm = f->value(ev.time, Side::Minus), fp = f->value(ev.time, Side::Plus);
      const double fscale = std::max({1.0, fm.norm(), fp.norm()});
      if (ev.kind == EventKind::Reflection) {
        const Vec N = unit_normal(pr.geom, *pr.surface, ev.point);
        const Vec diff = fp - fm;
        const Vec diff_top = diff - inner(pr.geom, ev.point, diff, N) * N;
        const double mean_perp = 0.5 * inner(pr.geom, ev.point, Vec(fp + fm), N);
        if (g_norm(pr.geom, ev.point, diff_top) > 1e-6 * fscale ||
            std::abs(mean_perp) > 1e-6 * fscale)
          throw Error(ErrorCode::InvalidField, "field violates the reflection jump conditions");
      } else {
        if ((fp - fm).norm() > 1e-6 * fscale)
          throw Error(ErrorCode::InvalidField, "field jumps at a kink");
      }
    }
  }

  double total = 0.0;
  // interior term: residual of W against Z
  if (!W.residual_free()) {
    for (const auto& seg : path.segments) {
      for (const auto& st : seg.sol.steps) {
        const double a = std::max(st.t0, seg.t0), b = std::min(st.t0 + st.h, seg.t1);
        if (b <= a) continue;
        total += gauss8(
            [&](double t) {
              const Vec x = path.position(t);
              return -inner(pr.geom, x, W.residual(t), Z.value(t, Side::Plus));
            },
            a, b);
      }
    }
  }

  // event terms
  for (const auto& ev : path.events) {
    const Vec Wm = W.value(ev.time, Side::Minus);
    const Vec Um = W.deriv(ev.time, Side::Minus), Up = W.deriv(ev.time, Side::Plus);
    const Vec Zm = Z.value(ev.time, Side::Minus), Zp = Z.value(ev.time, Side::Plus);
    if (ev.kind == EventKind::Reflection)
      total += reflection_term(pr, ev, Wm, Um, Up, Zm, Zp);
    else
      total += kink_term(pr, ev.point, Um, Up, Zm, Zp);
  }

  // extra kink sites contributed by the fields (break nodes)
  std::vector<double> kinks = W.extra_kink_times();
  for (double t : Z.extra_kink_times()) kinks.push_back(t);
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              kinks.end());
  for (double t : kinks) {
    if (t < 1e-12 || t > T - 1e-12) continue;
    bool at_event = false;
    for (const auto& ev : path.events)
      if (std::abs(ev.time - t) < 1e-12) at_event = true;
    if (at_event) continue;
    const Vec x = path.position(t);
    total += kink_term(pr, x, W.deriv(t, Side::Minus), W.deriv(t, Side::Plus),
                       Z.value(t, Side::Minus), Z.value(t, Side::Plus));
  }

  // periodic closure: t = 0 treated as an additional kink
  if (bc == BoundaryCondition::Periodic) {
    const Vec x0 = path.position(0.0);
    total += kink_term(pr, x0, W.deriv(T, Side::Minus), W.deriv(0.0, Side::Plus),
                       Z.value(T, Side::Minus), Z.value(0.0, Side::Plus));
  }
  return total;
}

// --- assembly ----------------------------------------------------------------

namespace {

double entry_from_samples(const ReflectedPath& path, const BrokenJacobiSpace& space,
                          const BrokenJacobiSpace::Samples& W,
                          const BrokenJacobiSpace::Samples& Z, BoundaryCondition bc) {
  const auto& pr = *path.problem;
  double total = 0.0;
  const auto& sites = space.sites();
  for (size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].event_index >= 0) {
      const auto& ev = path.events[sites[i].event_index];
      if (ev.kind == EventKind::Reflection)
        total += reflection_term(pr, ev, W.w_minus[i], W.u_minus[i], W.u_plus[i],
                                 Z.w_minus[i], Z.w_plus[i]);
      else
        total += kink_term(pr, ev.point, W.u_minus[i], W.u_plus[i], Z.w_minus[i], Z.w_plus[i]);
    } else {
      const Vec x = path.position(sites[i].time);
      total += kink_term(pr, x, W.u_minus[i], W.u_plus[i], Z.w_minus[i], Z.w_plus[i]);
    }
  }
  if (bc == BoundaryCondition::Periodic) {
    const Vec x0 = path.position(0.0);
    total += kink_term(pr, x0, W.u_end, W.u_begin, Z.w_end, Z.w_begin);
  }
  return total;
}

}  // namespace

IndexReport assemble_index_form(const ReflectedPath& path, int k, BoundaryCondition bc,
                                double tol_eig) {
  BrokenJacobiSpace space(path, k, bc);
  space.validate_spans();
  const int m = space.dim();

  std::vector<BrokenJacobiSpace::Samples> samples(m);
  for (int a = 0; a < m; ++a) {
    Vec q = Vec::Zero(m);
    q[a] = 1.0;
    samples[a] = space.sample(q);
  }

  Mat M(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      M(a, b) = entry_from_samples(path, space, samples[a], samples[b], bc);

  IndexReport rep;
  rep.k = k;
  rep.nodes = space.nodes();
  rep.asymmetry = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (rep.asymmetry > 1e-8 * std::max(1.0, M.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::InconclusiveIndex, "assembled form is not symmetric");
  rep.matrix = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(rep.matrix);
  rep.eigenvalues = eig.eigenvalues();
  const double lmax = rep.eigenvalues.cwiseAbs().maxCoeff();
  rep.tol_eig_abs = tol_eig * lmax;
  for (int i = 0; i < rep.eigenvalues.size(); ++i) {
    const double l = rep.eigenvalues[i];
    if (l < -rep.tol_eig_abs)
      ++rep.index;
    else if (l <= rep.tol_eig_abs)
      ++rep.nullity;
    else
      ++rep.positive;
  }
  return rep;
}

StabilityScan index_stability_scan(const ReflectedPath& path, int k0, BoundaryCondition bc,
                                   double tol_eig) {
  StabilityScan scan;
  for (int k : {k0, 2 * k0, 4 * k0}) scan.reports.push_back(assemble_index_form(path, k, bc, tol_eig));
  scan.stable = scan.reports[0].index == scan.reports[1].index &&
                scan.reports[1].index == scan.reports[2].index &&
                scan.reports[0].nullity == scan.reports[1].nullity &&
                scan.reports[1].nullity == scan.reports[2].nullity;
  return scan;
}

IndexReport stable_index(const ReflectedPath& path, int k0, BoundaryCondition bc,
                         double tol_eig) {
  StabilityScan scan = index_stability_scan(path, k0, bc, tol_eig);
  if (!scan.stable)
    throw Error(ErrorCode::InconclusiveIndex,
                "index or nullity changed under node refinement");
  return std::move(scan.reports.front());
}

Vec random_coords(const BrokenJacobiSpace& space, Rng& rng, double amplitude) {
  return rng.uniform_vec(space.dim(), -amplitude, amplitude);
}

// --- BrokenField -------------------------------------------------------------

BrokenField::BrokenField(std::shared_ptr<const BrokenJacobiSpace> space, Vec coords)
    : space_(std::move(space)), coords_(std::move(coords)) {}

Vec BrokenField::value(double t, Side side) const {
  const auto& nodes = space_->nodes();
  int s = 0;
  const int k = static_cast<int>(nodes.size()) - 1;
  while (s + 1 < k && (side == Side::Plus ? nodes[s + 1] <= t : nodes[s + 1] < t)) ++s;
  // combine the span basis with the span coefficients
  return space_->span_value(coords_, s, t, side, /*deriv=*/false);
}

Vec BrokenField::deriv(double t, Side side) const {
  const auto& nodes = space_->nodes();
  int s = 0;
  const int k = static_cast<int>(nodes.size()) - 1;
  while (s + 1 < k && (side == Side::Plus ? nodes[s + 1] <= t : nodes[s + 1] < t)) ++s;
  return space_->span_value(coords_, s, t, side, /*deriv=*/true);
}

std::vector<double> BrokenField::extra_kink_times() const {
  const auto& nodes = space_->nodes();
  return std::vector<double>(nodes.begin() + 1, nodes.end() - 1);
}

}  // namespace rjf
