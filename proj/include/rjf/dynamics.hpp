#pragma once
#include <functional>
#include <optional>
#include <vector>

#include "rjf/geometry.hpp"
#include "rjf/ode.hpp"

namespace rjf {

enum class EventKind { Reflection, Kink };
enum class Side { Minus, Plus };

struct EventRecord {
  double time = 0;
  Vec point;
  Vec v_in, v_out;
  EventKind kind = EventKind::Reflection;
  int incoming_side = +1;  // sign of rho on the segment before the event
};

// One smooth piece of a trajectory; sol stores the dense (x, v) state over
// [t0, t1] (the final integrator step may extend past t1; evaluation is only
// meaningful up to t1).
struct PathSegment {
  double t0 = 0, t1 = 0;
  int side = 0;  // sign of rho in the segment interior; 0 when no surface
  DenseSolution sol;
};

struct ReflectedPath {
  ProblemPtr problem;
  std::vector<PathSegment> segments;
  std::vector<EventRecord> events;
  double total_time = 0;
  bool periodic = false;

  int dim() const { return problem->geom.dim; }
  int segment_index(double t, Side side = Side::Plus) const;
  Vec state(double t, Side side = Side::Plus) const;     // [x; v]
  Vec position(double t, Side side = Side::Plus) const;
  Vec velocity(double t, Side side = Side::Plus) const;
  double energy(double t) const;

  // Sub-path on [0, t_cut]; events beyond t_cut dropped.
  ReflectedPath restrict(double t_cut) const;
};

enum class Decision { Reflect, Transmit };
enum class Overflow { ErrorOnExtra, AlwaysReflect, AlwaysTransmit };

struct EventPolicy {
  std::vector<Decision> decisions;
  Overflow overflow = Overflow::AlwaysReflect;
};

struct ShootOptions {
  // Test hook: scales v_out at one reflection to produce a non-physical path.
  double reflect_scale = 1.0;
  int reflect_scale_event = -1;
};

// Velocity after reflection at y on Y: v - 2 <v,N>_g N.
Vec reflect_velocity(const ChartGeometry& g, const HypersurfaceSpec& s, const Vec& y,
                     const Vec& v_in, double v_min = 1e-6);

// Integrates the mechanical system from (x0, v0), chaining segments and
// consuming the event policy at each located crossing of Y.
ReflectedPath shoot(ProblemPtr problem, const Vec& x0, const Vec& v0, double T,
                    const EventPolicy& policy, const ShootOptions& opts = {});

// Lagrangian action along the path (Gauss-Legendre per integrator step).
double action(const ReflectedPath& path);

// Max first-variation value over the probe fields. Probes are given as
// piecewise values along the path; see make_admissible_probe.
struct ProbeField {
  // one-sided values at any time; must satisfy the admissibility jumps
  std::function<Vec(double t, Side side)> value;
};
double criticality_residual(const ReflectedPath& path, const std::vector<ProbeField>& probes);

// Builds a probe that vanishes at t=0, T and satisfies the admissibility jump
// conditions at every event (mirror jumps accumulated across reflections).
ProbeField make_admissible_probe(const ReflectedPath& path, const Vec& coeff_a,
                                 const Vec& coeff_b);

struct PathDiagnostics {
  double max_position_gap = 0;     // continuity across events
  double energy_drift = 0;         // relative
  double max_reflection_defect = 0;  // reflection law residual, g-norm
  double max_kink_defect = 0;        // velocity continuity at kinks
  bool events_increasing = true;
};
PathDiagnostics diagnose(const ReflectedPath& path);

// Two-point problem: find v with shoot(x, v, T) ending at y (implemented on
// top of the linearized endpoint map; exact Newton derivative).
ReflectedPath two_point_solve(ProblemPtr problem, const Vec& x, const Vec& y,
                              const Vec& v_guess, double T, const EventPolicy& policy);

// Gauss-Newton refinement of a nearby periodic orbit with fixed period T.
// Returns the closed path; phase-space closure below 1e-9.
ReflectedPath refine_periodic_orbit(ProblemPtr problem, const Vec& x_guess,
                                    const Vec& v_guess, double T, const EventPolicy& policy);

}  // namespace rjf
