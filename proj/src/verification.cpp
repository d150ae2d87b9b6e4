#include "rjf/verification.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "rjf/morse.hpp"

namespace rjf {

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ProblemPtr make_problem(ChartGeometry g, std::optional<HypersurfaceSpec> s, PotentialSpec p) {
  Problem pr;
  pr.geom = std::move(g);
  pr.surface = std::move(s);
  pr.potential = std::move(p);
  return std::make_shared<const Problem>(std::move(pr));
}

HypersurfaceSpec strip_walls() {
  Polynomial rho;
  rho.dim = 2;
  rho.terms = {{1.0, {1, 0}}, {-1.0, {2, 0}}};
  auto s = make_surface_polynomial(rho, +1);
  s.boundary = true;
  return s;
}

struct OraclePath {
  std::string name;
  ReflectedPath path;
  EventPolicy policy;
  bool exact_flat = false;  // flow affine in the data: FD ratio test vacuous
};

struct OracleSet {
  std::vector<OraclePath> paths;  // flat controls + curved oracles
  ReflectedPath sphere32, sphere_pi, harmonic, disk_orbit_based;
  std::vector<ReflectedPath> mirror;  // theta = 15, 30, 45 degrees
  std::vector<double> mirror_expected;
  ProblemPtr disk_problem;
  EventPolicy disk_policy;
};

OracleSet build_oracles() {
  OracleSet set;
  EventPolicy policy;

  auto flat = make_problem(make_chart_euclidean(2), {}, make_potential_zero());
  set.paths.push_back({"flat-0-reflections", shoot(flat, v2(0.0, 0.3), v2(0.7, 0.1), 3.0, policy),
                       policy, true});

  auto wall = make_surface_hyperplane(2, 0.0, +1);
  wall.boundary = true;
  auto wall_pr = make_problem(make_chart_euclidean(2), std::move(wall), make_potential_zero());
  set.paths.push_back({"flat-1-reflection", shoot(wall_pr, v2(1.0, 0.0), v2(-1.0, 0.25), 2.0, policy),
                       policy, true});

  auto strip_pr = make_problem(make_chart_euclidean(2), strip_walls(), make_potential_zero());
  for (int refl : {2, 3, 4}) {
    const double T = static_cast<double>(refl);
    set.paths.push_back({"flat-strip-" + std::to_string(refl),
                         shoot(strip_pr, v2(0.5, 0.0), v2(1.0, 0.25), T, policy), policy, true});
  }

  auto sphere_pr = make_problem(make_chart_sphere_polar(), {}, make_potential_zero());
  set.sphere32 = shoot(sphere_pr, v2(M_PI / 2, 0.0), v2(0.0, 1.0), 1.5 * M_PI, policy);
  set.sphere_pi = shoot(sphere_pr, v2(M_PI / 2, 0.0), v2(0.0, 1.0), M_PI, policy);
  set.paths.push_back({"sphere-3pi2", set.sphere32, policy, false});

  auto harm_pr = make_problem(make_chart_euclidean(2), {}, make_potential_harmonic(1.0));
  set.harmonic = shoot(harm_pr, v2(0, 0), v2(1.0, 0.0), 2.5 * M_PI, policy);
  set.paths.push_back({"harmonic-2.5pi", set.harmonic, policy, false});

  auto disk_surface = make_surface_sphere_level(2, 1.0, +1);
  disk_surface.boundary = true;
  set.disk_problem =
      make_problem(make_chart_euclidean(2), std::move(disk_surface), make_potential_zero());
  for (double deg : {15.0, 30.0, 45.0}) {
    const double theta = deg * M_PI / 180.0;
    const double d1 = 0.8 * std::cos(theta);
    const double d2 = 1.0 / (2.0 / std::cos(theta) - 1.0 / d1);
    const Vec dir = v2(std::cos(theta), std::sin(theta));
    set.mirror.push_back(shoot(set.disk_problem, Vec(v2(1.0, 0.0) - d1 * dir), dir,
                               d1 + 1.9 * std::cos(theta), policy));
    set.mirror_expected.push_back(d1 + d2);
    set.paths.push_back({"mirror-" + std::to_string(static_cast<int>(deg)), set.mirror.back(),
                         policy, false});
  }

  set.disk_policy = policy;
  const auto orbit = refine_periodic_orbit(set.disk_problem, v2(0.3, 0.0), v2(1.0, 0.0), 4.0, policy);
  set.disk_orbit_based =
      rebase_periodic(set.disk_problem, orbit, policy, default_base_time(orbit));
  set.paths.push_back({"disk-diameter-orbit", set.disk_orbit_based, policy, false});

  return set;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

CriterionResult criterion_flat_controls(const OracleSet& set) {
  CriterionResult c{1, "flat-space controls: zero index, zero conjugate points", true, ""};
  std::ostringstream d;
  for (size_t i = 0; i < 5; ++i) {
    const auto& op = set.paths[i];
    const auto res = fixed_endpoint_index_theorem(op.path);
    const double min_eig = res.report.eigenvalues.minCoeff();
    const double lmax = res.report.eigenvalues.cwiseAbs().maxCoeff();
    const bool ok = res.report.index == 0 && res.report.nullity == 0 &&
                    res.scan.points.empty() && min_eig > 1e-9 * lmax;
    c.pass = c.pass && ok;
    d << op.name << " index " << res.report.index << "==0 nullity " << res.report.nullity
      << "==0 conjugate 0 min_eig " << fmt(min_eig) << "; ";
  }
  c.details = d.str();
  return c;
}

CriterionResult criterion_sphere(const OracleSet& set) {
  CriterionResult c{2, "sphere oracle: conjugate point at pi, index 1", false, ""};
  const auto res = fixed_endpoint_index_theorem(set.sphere32);
  std::ostringstream d;
  bool ok = res.scan.points.size() == 1;
  double terr = 1.0;
  if (ok) {
    terr = std::abs(res.scan.points[0].time - M_PI);
    ok = terr < 1e-8 && res.scan.points[0].multiplicity == 1;
  }
  ok = ok && res.report.index == 1 && res.pass;
  d << "t* err " << fmt(terr) << " <1e-8, multiplicity "
    << (res.scan.points.empty() ? 0 : res.scan.points[0].multiplicity) << "==1, index "
    << res.report.index << "==1, theorem " << res.report.index << "==" << res.conjugate_count;
  c.pass = ok;
  c.details = d.str();
  return c;
}

CriterionResult criterion_harmonic(const OracleSet& set) {
  CriterionResult c{3, "harmonic oscillator oracle: double conjugate points, index 4", false, ""};
  const auto res = fixed_endpoint_index_theorem(set.harmonic);
  std::ostringstream d;
  bool ok = res.scan.points.size() == 2;
  if (ok) {
    const double e1 = std::abs(res.scan.points[0].time - M_PI);
    const double e2 = std::abs(res.scan.points[1].time - 2.0 * M_PI);
    ok = e1 < 1e-8 && e2 < 1e-8 && res.scan.points[0].multiplicity == 2 &&
         res.scan.points[1].multiplicity == 2;
    d << "t* errs " << fmt(e1) << "," << fmt(e2) << " <1e-8, multiplicities "
      << res.scan.points[0].multiplicity << "," << res.scan.points[1].multiplicity << "==2,2, ";
  }
  ok = ok && res.report.index == 4 && res.pass;
  d << "index " << res.report.index << "==4, theorem " << res.report.index
    << "==" << res.conjugate_count;
  c.pass = ok;
  c.details = d.str();
  return c;
}

CriterionResult criterion_mirror(const OracleSet& set) {
  CriterionResult c{4, "mirror-equation oracle at 15/30/45 degrees", true, ""};
  std::ostringstream d;
  for (size_t i = 0; i < set.mirror.size(); ++i) {
    const auto scan = conjugate_points(set.mirror[i]);
    bool ok = scan.points.size() == 1;
    double err = 1.0;
    if (ok) {
      err = std::abs(scan.points[0].time - set.mirror_expected[i]);
      ok = err < 1e-6 && scan.points[0].multiplicity == 1;
    }
    c.pass = c.pass && ok;
    d << "err " << fmt(err) << " <1e-6; ";
  }
  c.details = d.str();
  return c;
}

CriterionResult criterion_jump_residuals(const OracleSet& set) {
  CriterionResult c{5, "jump-condition residuals below 1e-8 on every path", true, ""};
  double worst = 0.0;
  for (const auto& op : set.paths) {
    Rng rng(101);
    for (int rep = 0; rep < 20; ++rep) {
      const auto f = propagate_jacobi(op.path, rng.uniform_vec(2, -1.0, 1.0),
                                      rng.uniform_vec(2, -1.0, 1.0));
      for (size_t e = 0; e < f.jumps().size(); ++e)
        worst = std::max(worst,
                         jump_residuals(*op.path.problem, op.path.events[e], f.jumps()[e]).max());
    }
  }
  c.pass = worst < 1e-8;
  c.details = "max residual " + fmt(worst) + " < 1e-8 over 20 random fields per path";
  return c;
}

CriterionResult criterion_variation_consistency(const OracleSet& set) {
  CriterionResult c{6, "finite-difference variations match propagated fields", true, ""};
  std::ostringstream d;
  Rng rng(103);
  for (const auto& op : set.paths) {
    const Vec W0 = rng.uniform_vec(2, -0.3, 0.3), U0 = rng.uniform_vec(2, -0.3, 0.3);
    const double e4 = variation_consistency_check(op.path, op.policy, W0, U0, 1e-4);
    bool ok = e4 < 1e-3;
    if (!op.exact_flat && e4 > 1e-9) {
      const double e3 = variation_consistency_check(op.path, op.policy, W0, U0, 1e-3);
      const double ratio = e3 / e4;
      ok = ok && ratio > 5.0 && ratio < 20.0;
      d << op.name << " e(1e-4) " << fmt(e4) << " ratio " << fmt(ratio) << "; ";
    } else {
      d << op.name << " e(1e-4) " << fmt(e4) << " (affine flow, ratio vacuous); ";
    }
    c.pass = c.pass && ok;
  }
  c.details = d.str();
  return c;
}

CriterionResult criterion_null_space(const OracleSet& set) {
  CriterionResult c{7, "null-space characterization at conjugate endpoints", false, ""};
  const auto& path = set.sphere_pi;
  const auto rep = assemble_index_form(path, 8, BoundaryCondition::Fixed);
  PropagatedField W(propagate_jacobi(path, v2(0, 0), v2(1.0, 0.0)));
  auto space = std::make_shared<const BrokenJacobiSpace>(path, 8, BoundaryCondition::Fixed);
  Rng rng(107);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    BrokenField Z(space, random_coords(*space, rng));
    worst = std::max(worst, std::abs(second_variation(path, W, Z, BoundaryCondition::Fixed)));
  }
  c.pass = rep.nullity == 1 && worst < 1e-7;
  c.details = "nullity " + std::to_string(rep.nullity) + "==1, max |J''(W,Z)| " + fmt(worst) +
              " < 1e-7 over 20 fields";
  return c;
}

struct SweepCounts {
  int identity = 0, degenerate = 0, inconclusive = 0, failed = 0;
};

SweepCounts sweep_draw(int i) {
  SweepCounts counts;
  Rng rng(1000 + static_cast<std::uint64_t>(i));
  Polynomial phi;
  phi.dim = 2;
  phi.terms = {{rng.uniform(-0.05, 0.05), {1, 0}}, {rng.uniform(-0.05, 0.05), {0, 1}},
               {rng.uniform(-0.05, 0.05), {2, 0}}, {rng.uniform(-0.05, 0.05), {1, 1}},
               {rng.uniform(-0.05, 0.05), {0, 2}}};
  auto surface = make_surface_sphere_level(2, 1.0, +1);
  surface.boundary = true;
  auto pr = make_problem(make_chart_conformal(phi, 2), std::move(surface), make_potential_zero());
  EventPolicy policy;
  try {
    const auto orbit = refine_periodic_orbit(pr, v2(0.3, 0.0), v2(1.0, 0.0), 4.0, policy);
    PeriodicOptions opts;
    opts.hess_h = 1e-3;
    const auto rep = periodic_index_theorem(pr, orbit, policy, opts);
    if (rep.self_conjugate)
      counts.degenerate = 1;
    else if (rep.identity_holds)
      counts.identity = 1;
    else
      counts.failed = 1;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InconclusiveIndex)
      counts.inconclusive = 1;
    else
      counts.failed = 1;
  }
  return counts;
}

CriterionResult criterion_periodic(const OracleSet& set, int jobs) {
  CriterionResult c{8, "periodic index theorem: disk orbit and 50 perturbed draws", false, ""};
  PeriodicOptions opts;
  opts.hess_h = 1e-3;
  opts.base_time = 0.0;  // the orbit is already re-based off the wall midpoints
  const auto disk_rep =
      periodic_index_theorem(set.disk_problem, set.disk_orbit_based, set.disk_policy, opts);
  const bool disk_ok = !disk_rep.self_conjugate && disk_rep.identity_holds;

  const int draws = 50;
  SweepCounts total;
  if (jobs <= 1) {
    for (int i = 0; i < draws; ++i) {
      const auto counts = sweep_draw(i);
      total.identity += counts.identity;
      total.degenerate += counts.degenerate;
      total.inconclusive += counts.inconclusive;
      total.failed += counts.failed;
    }
  } else {
    std::vector<std::future<SweepCounts>> futs;
    for (int i = 0; i < draws; ++i)
      futs.push_back(std::async(std::launch::async, sweep_draw, i));
    for (auto& f : futs) {
      const auto counts = f.get();
      total.identity += counts.identity;
      total.degenerate += counts.degenerate;
      total.inconclusive += counts.inconclusive;
      total.failed += counts.failed;
    }
  }
  const bool sweep_ok = total.failed == 0 && total.inconclusive == 0 &&
                        total.degenerate < draws / 10 &&
                        total.identity + total.degenerate == draws;
  c.pass = disk_ok && sweep_ok;
  std::ostringstream d;
  d << "disk orbit: periodic " << disk_rep.periodic_index << " == fixed " << disk_rep.fixed_index
    << " + concavity " << disk_rep.concavity_index << "; sweep: " << total.identity
    << "/50 identity, " << total.degenerate << " degenerate (<5), " << total.inconclusive
    << " inconclusive, " << total.failed << " failed";
  c.details = d.str();
  return c;
}

CriterionResult criterion_discretization(const OracleSet& set) {
  CriterionResult c{9, "index and nullity stable across k, 2k, 4k", true, ""};
  std::ostringstream d;
  for (const auto& op : set.paths) {
    const auto scan = index_stability_scan(op.path, 8, BoundaryCondition::Fixed);
    c.pass = c.pass && scan.stable;
    d << op.name << " fixed(" << scan.reports[0].index << "," << scan.reports[0].nullity << ")"
      << (scan.stable ? "=" : "!") << "; ";
  }
  const auto per = index_stability_scan(set.disk_orbit_based, 8, BoundaryCondition::Periodic);
  c.pass = c.pass && per.stable;
  d << "disk periodic(" << per.reports[0].index << "," << per.reports[0].nullity << ")"
    << (per.stable ? "=" : "!");
  c.details = d.str();
  return c;
}

CriterionResult criterion_bilinearity(const OracleSet& set) {
  CriterionResult c{10, "symmetry and bilinearity of the second variation", true, ""};
  double worst_asym = 0.0, worst_bilin = 0.0;
  for (const auto& op : set.paths) {
    auto space = std::make_shared<const BrokenJacobiSpace>(op.path, 6, BoundaryCondition::Fixed);
    Rng rng(109);
    for (int rep = 0; rep < 4; ++rep) {
      const Vec qa = random_coords(*space, rng), qb = random_coords(*space, rng),
                qc = random_coords(*space, rng);
      BrokenField A(space, qa), B(space, qb), C(space, qc);
      const double ab = second_variation(op.path, A, B, BoundaryCondition::Fixed);
      const double ba = second_variation(op.path, B, A, BoundaryCondition::Fixed);
      worst_asym = std::max(worst_asym, std::abs(ab - ba));
      BrokenField combo(space, Vec(1.25 * qa - 0.75 * qb));
      const double lhs = second_variation(op.path, combo, C, BoundaryCondition::Fixed);
      const double rhs = 1.25 * second_variation(op.path, A, C, BoundaryCondition::Fixed) -
                         0.75 * second_variation(op.path, B, C, BoundaryCondition::Fixed);
      worst_bilin = std::max(worst_bilin, std::abs(lhs - rhs));
    }
  }
  c.pass = worst_asym < 1e-8 && worst_bilin < 1e-9;
  c.details = "max asymmetry " + fmt(worst_asym) + " < 1e-8, max bilinearity defect " +
              fmt(worst_bilin) + " < 1e-9";
  return c;
}

}  // namespace

bool VerificationReport::all_pass() const {
  for (const auto& c : criteria)
    if (!c.pass) return false;
  return !criteria.empty();
}

Json VerificationReport::to_json() const {
  Json arr = Json::array();
  for (const auto& c : criteria) {
    Json e = Json::object();
    e.set("id", Json::integer(c.id));
    e.set("name", Json::str(c.name));
    e.set("pass", Json::boolean(c.pass));
    e.set("details", Json::str(c.details));
    arr.push(std::move(e));
  }
  Json j = Json::object();
  j.set("criteria", std::move(arr));
  j.set("all_pass", Json::boolean(all_pass()));
  return j;
}

VerificationReport run_verification_suite(int jobs) {
  const OracleSet set = build_oracles();
  VerificationReport rep;
  rep.criteria.push_back(criterion_flat_controls(set));
  rep.criteria.push_back(criterion_sphere(set));
  rep.criteria.push_back(criterion_harmonic(set));
  rep.criteria.push_back(criterion_mirror(set));
  rep.criteria.push_back(criterion_jump_residuals(set));
  rep.criteria.push_back(criterion_variation_consistency(set));
  rep.criteria.push_back(criterion_null_space(set));
  rep.criteria.push_back(criterion_periodic(set, jobs));
  rep.criteria.push_back(criterion_discretization(set));
  rep.criteria.push_back(criterion_bilinearity(set));
  return rep;
}

}  // namespace rjf
