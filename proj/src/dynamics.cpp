#include "rjf/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace rjf {

namespace {

// Right-hand side of the mechanical system in chart coordinates:
// x' = v, v'^k = -Gamma^k_ij v^i v^j - (g^{-1} dV)^k.
OdeRhs mechanical_rhs(const ProblemPtr& pr) {
  return [pr](double /*t*/, const Vec& y, Vec& dydt) {
    const int n = pr->geom.dim;
    const Vec x = y.head(n), v = y.tail(n);
    const auto gamma = christoffel(pr->geom, x);
    const Vec grad_v = potential_gradient_vec(pr->geom, pr->potential, x);
    dydt.resize(2 * n);
    dydt.head(n) = v;
    dydt.tail(n) = -gamma_apply(gamma, v, v) - grad_v;
  };
}

struct Crossing {
  double t;
  Vec x, v;
};

// Integrates one smooth piece until t_max or the first located crossing of Y.
std::pair<PathSegment, std::optional<Crossing>> integrate_segment(const ProblemPtr& pr,
                                                                  const Vec& x0, const Vec& v0,
                                                                  double t_start, double t_max) {
  const int n = pr->geom.dim;
  const Tolerances& tol = pr->tol;
  Vec y0(2 * n);
  y0 << x0, v0;
  OdeOptions opts;
  opts.rtol = tol.rtol;
  opts.atol = tol.atol;
  Dopri5 stepper(mechanical_rhs(pr), t_start, y0, t_max, opts);

  PathSegment seg;
  seg.t0 = t_start;
  const bool has_surface = pr->surface.has_value();
  const double arm_eps = std::max(100.0 * tol.tol_Y, 1e-7);

  double side_sign = 0.0;
  bool armed = false;
  if (has_surface) {
    const double rho0 = pr->surface->rho(x0);
    if (std::abs(rho0) >= arm_eps) {
      armed = true;
      side_sign = rho0 > 0 ? 1.0 : -1.0;
    } else {
      // starting on or near Y: side determined by the direction of motion
      const double drho = pr->surface->grad_rho(x0).dot(v0);
      side_sign = drho >= 0 ? 1.0 : -1.0;
    }
  }
  seg.side = has_surface ? static_cast<int>(side_sign) : 0;

  std::optional<Crossing> crossing;
  auto rho_along = [&](double t) {
    const Vec y = stepper.solution().eval(t);
    return pr->surface->rho(y.head(n));
  };

  while (!stepper.done()) {
    stepper.step();
    if (!has_surface) continue;
    const OdeStep& st = stepper.solution().steps.back();
    const double t_hi = std::min(st.t0 + st.h, stepper.t());
    // probe the dense output inside the step so a crossing cannot hide
    double t_prev = st.t0;
    double rho_prev = rho_along(t_prev);
    const int probes = 4;
    bool found = false;
    for (int i = 1; i <= probes && !found; ++i) {
      const double t_i = st.t0 + (t_hi - st.t0) * i / probes;
      const double rho_i = rho_along(t_i);
      if (!armed) {
        if (std::abs(rho_i) >= arm_eps) armed = true;
      } else if ((rho_prev > 0) != (rho_i > 0) || rho_i == 0.0) {
        const double t_e =
            brent_root([&](double t) { return rho_along(t); }, t_prev, t_i, rho_prev, rho_i,
                       tol.event_time_tol);
        const Vec ye = stepper.solution().eval(t_e);
        Crossing c;
        c.t = t_e;
        c.x = ye.head(n);
        c.v = ye.tail(n);
        crossing = std::move(c);
        found = true;
      }
      t_prev = t_i;
      rho_prev = rho_i;
    }
    if (found) break;
  }

  seg.sol = stepper.take_solution();
  seg.t1 = crossing ? crossing->t : t_max;
  return {std::move(seg), std::move(crossing)};
}

}  // namespace

int ReflectedPath::segment_index(double t, Side side) const {
  const int m = static_cast<int>(segments.size());
  for (int i = 0; i < m - 1; ++i) {
    const auto& s = segments[i];
    if (side == Side::Plus ? (t < s.t1) : (t <= s.t1)) return i;
  }
  return m - 1;
}

Vec ReflectedPath::state(double t, Side side) const {
  const auto& seg = segments[segment_index(t, side)];
  const double tc = std::clamp(t, seg.t0, seg.t1);
  return seg.sol.eval(tc);
}

Vec ReflectedPath::position(double t, Side side) const {
  return state(t, side).head(dim());
}

Vec ReflectedPath::velocity(double t, Side side) const {
  return state(t, side).tail(dim());
}

double ReflectedPath::energy(double t) const {
  const Vec y = state(t);
  const Vec x = y.head(dim()), v = y.tail(dim());
  return 0.5 * inner(problem->geom, x, v, v) + problem->potential.v(x);
}

ReflectedPath ReflectedPath::restrict(double t_cut) const {
  ReflectedPath out;
  out.problem = problem;
  out.total_time = t_cut;
  for (const auto& seg : segments) {
    if (seg.t0 >= t_cut) break;
    PathSegment s = seg;
    s.t1 = std::min(seg.t1, t_cut);
    out.segments.push_back(std::move(s));
    if (seg.t1 >= t_cut) break;
  }
  for (const auto& ev : events)
    if (ev.time < t_cut - 1e-12) out.events.push_back(ev);
  return out;
}

Vec reflect_velocity(const ChartGeometry& g, const HypersurfaceSpec& s, const Vec& y,
                     const Vec& v_in, double v_min) {
  const Vec N = unit_normal(g, s, y);
  const double vn = inner(g, y, v_in, N);
  if (std::abs(vn) <= v_min)
    throw Error(ErrorCode::Tangency, "tangential incidence at the hypersurface");
  return v_in - 2.0 * vn * N;
}

ReflectedPath shoot(ProblemPtr problem, const Vec& x0, const Vec& v0, double T,
                    const EventPolicy& policy, const ShootOptions& opts) {
  ReflectedPath path;
  path.problem = problem;
  path.total_time = T;
  const Tolerances& tol = problem->tol;

  Vec x = x0, v = v0;
  double t = 0.0;
  size_t policy_pos = 0;

  while (t < T - 1e-14 * std::max(1.0, T)) {
    auto [seg, crossing] = integrate_segment(problem, x, v, t, T);
    path.segments.push_back(std::move(seg));
    if (!crossing || crossing->t >= T - 1e-12) break;

    if (static_cast<int>(path.events.size()) >= tol.max_events)
      throw Error(ErrorCode::MaxEvents, "event cap exceeded");

    Decision decision = Decision::Reflect;
    if (policy_pos < policy.decisions.size()) {
      decision = policy.decisions[policy_pos++];
    } else {
      switch (policy.overflow) {
        case Overflow::ErrorOnExtra:
          throw Error(ErrorCode::PolicyExhausted, "event policy exhausted");
        case Overflow::AlwaysReflect: decision = Decision::Reflect; break;
        case Overflow::AlwaysTransmit: decision = Decision::Transmit; break;
      }
    }
    if (decision == Decision::Transmit && problem->surface->boundary)
      throw Error(ErrorCode::TransmitForbidden,
                  "transmission through a boundary hypersurface");

    EventRecord ev;
    ev.time = crossing->t;
    ev.point = crossing->x;
    ev.v_in = crossing->v;
    ev.incoming_side = path.segments.back().side;
    if (decision == Decision::Reflect) {
      ev.kind = EventKind::Reflection;
      ev.v_out = reflect_velocity(problem->geom, *problem->surface, ev.point, ev.v_in, tol.v_min);
      const int idx = static_cast<int>(path.events.size());
      if (opts.reflect_scale_event == idx) ev.v_out *= opts.reflect_scale;
    } else {
      ev.kind = EventKind::Kink;
      // non-tangency still required at a transmission
      const Vec N = unit_normal(problem->geom, *problem->surface, ev.point);
      if (std::abs(inner(problem->geom, ev.point, ev.v_in, N)) <= tol.v_min)
        throw Error(ErrorCode::Tangency, "tangential incidence at the hypersurface");
      ev.v_out = ev.v_in;
    }
    path.events.push_back(ev);
    t = ev.time;
    x = ev.point;
    v = ev.v_out;
  }
  return path;
}

double action(const ReflectedPath& path) {
  const auto& pr = *path.problem;
  const int n = pr.geom.dim;
  auto lagrangian = [&](const DenseSolution& sol, double t) {
    const Vec y = sol.eval(t);
    const Vec x = y.head(n), v = y.tail(n);
    return 0.5 * inner(pr.geom, x, v, v) - pr.potential.v(x);
  };
  double total = 0.0;
  for (const auto& seg : path.segments) {
    for (const auto& st : seg.sol.steps) {
      const double a = std::max(st.t0, seg.t0);
      const double b = std::min(st.t0 + st.h, seg.t1);
      if (b <= a) continue;
      total += gauss8([&](double t) { return lagrangian(seg.sol, t); }, a, b);
    }
  }
  return total;
}

ProbeField make_admissible_probe(const ReflectedPath& path, const Vec& coeff_a,
                                 const Vec& coeff_b) {
  // Base smooth field F(t) = a cos(2pi t/T) + b sin(pi t/T); at each
  // reflection the probe picks up the mirror jump, realized by accumulating a
  // constant offset per segment; the whole field is damped by sin(pi t/T) so
  // it vanishes at both endpoints.
  const auto& pr = *path.problem;
  const double T = path.total_time;
  const int n = pr.geom.dim;

  auto base = [coeff_a, coeff_b, T](double t) {
    return Vec(coeff_a * std::cos(2.0 * M_PI * t / T) + coeff_b * std::sin(M_PI * t / T));
  };
  // per-segment offsets
  std::vector<Vec> offsets(path.segments.size(), Vec::Zero(n));
  Vec off = Vec::Zero(n);
  for (size_t i = 0; i < path.events.size(); ++i) {
    const auto& ev = path.events[i];
    if (ev.kind == EventKind::Reflection) {
      const Vec z_minus = base(ev.time) + off;
      const Vec N = unit_normal(pr.geom, *pr.surface, ev.point);
      const double zn = inner(pr.geom, ev.point, z_minus, N);
      off -= 2.0 * zn * N;  // mirror: tangential kept, normal negated
    }
    if (i + 1 < offsets.size()) offsets[i + 1] = off;
  }
  ProbeField probe;
  probe.value = [base, offsets, path, T](double t, Side side) {
    const int si = path.segment_index(t, side);
    const double damp = std::sin(M_PI * t / T);
    return Vec(damp * (base(t) + offsets[si]));
  };
  return probe;
}

double criticality_residual(const ReflectedPath& path, const std::vector<ProbeField>& probes) {
  const auto& pr = *path.problem;
  const int n = pr.geom.dim;
  double worst = 0.0;
  for (const auto& probe : probes) {
    double total = 0.0;
    // integral term: <D_t v + grad V, Z> from the dense derivative
    for (const auto& seg : path.segments) {
      for (const auto& st : seg.sol.steps) {
        const double a = std::max(st.t0, seg.t0);
        const double b = std::min(st.t0 + st.h, seg.t1);
        if (b <= a) continue;
        total += gauss8(
            [&](double t) {
              const Vec y = seg.sol.eval(t);
              const Vec dy = seg.sol.eval_deriv(t);
              const Vec x = y.head(n), v = y.tail(n), vdot = dy.tail(n);
              const Vec dtv = vdot + gamma_apply(christoffel(pr.geom, x), v, v);
              const Vec resid = dtv + potential_gradient_vec(pr.geom, pr.potential, x);
              return -inner(pr.geom, x, resid, probe.value(t, Side::Plus));
            },
            a, b);
      }
    }
    // event terms: <-delta v, mean probe>
    for (const auto& ev : path.events) {
      const Vec dv = ev.v_out - ev.v_in;
      const Vec zbar =
          0.5 * (probe.value(ev.time, Side::Minus) + probe.value(ev.time, Side::Plus));
      total += inner(pr.geom, ev.point, -dv, zbar);
    }
    worst = std::max(worst, std::abs(total));
  }
  return worst;
}

PathDiagnostics diagnose(const ReflectedPath& path) {
  PathDiagnostics d;
  const auto& pr = *path.problem;

  const double e0 = path.energy(0.0);
  const double escale = std::max(std::abs(e0), 1e-6);
  const int samples = 200;
  for (int i = 0; i <= samples; ++i) {
    const double t = path.total_time * i / samples;
    d.energy_drift = std::max(d.energy_drift, std::abs(path.energy(t) - e0) / escale);
  }
  double prev_t = 0.0;
  for (size_t i = 0; i < path.events.size(); ++i) {
    const auto& ev = path.events[i];
    if (ev.time <= prev_t && i > 0) d.events_increasing = false;
    prev_t = ev.time;
    const Vec x_minus = path.position(ev.time, Side::Minus);
    const Vec x_plus = path.position(ev.time, Side::Plus);
    d.max_position_gap = std::max({d.max_position_gap, (x_minus - ev.point).norm(),
                                   (x_plus - ev.point).norm()});
    if (ev.kind == EventKind::Reflection) {
      const Vec N = unit_normal(pr.geom, *pr.surface, ev.point);
      const Vec sum = ev.v_in + ev.v_out;
      const double perp_defect = std::abs(inner(pr.geom, ev.point, sum, N));
      Vec diff = ev.v_out - ev.v_in;
      const Vec diff_top = diff - inner(pr.geom, ev.point, diff, N) * N;
      d.max_reflection_defect =
          std::max({d.max_reflection_defect, perp_defect, g_norm(pr.geom, ev.point, diff_top)});
    } else {
      d.max_kink_defect =
          std::max(d.max_kink_defect, g_norm(pr.geom, ev.point, ev.v_out - ev.v_in));
    }
  }
  return d;
}

}  // namespace rjf
