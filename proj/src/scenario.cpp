#include "rjf/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rjf {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void parse_fail(const std::string& name, int line, const std::string& what) {
  throw Error(ErrorCode::InputError,
              name + ":" + std::to_string(line) + ": " + what);
}

Vec parse_vec(const std::string& value, const std::string& name, int line) {
  std::istringstream is(value);
  std::vector<double> vals;
  double x;
  while (is >> x) vals.push_back(x);
  if (!is.eof()) parse_fail(name, line, "malformed vector '" + value + "'");
  Vec v(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
  return v;
}

// term list "c e1 e2 ; c e1 e2 ; ..." with one exponent per coordinate
Polynomial parse_poly(const std::string& value, int dim, const std::string& name, int line) {
  Polynomial p;
  p.dim = dim;
  std::stringstream terms(value);
  std::string term;
  while (std::getline(terms, term, ';')) {
    term = trim(term);
    if (term.empty()) continue;
    std::istringstream is(term);
    Polynomial::Term t;
    if (!(is >> t.coeff)) parse_fail(name, line, "bad polynomial coefficient in '" + term + "'");
    int e;
    while (is >> e) t.exponents.push_back(e);
    if (static_cast<int>(t.exponents.size()) != dim)
      parse_fail(name, line, "expected " + std::to_string(dim) + " exponents in '" + term + "'");
    p.terms.push_back(std::move(t));
  }
  if (p.terms.empty()) parse_fail(name, line, "empty polynomial");
  return p;
}

double parse_num(const std::string& value, const std::string& name, int line) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (trim(value.substr(pos)).empty()) return v;
  } catch (...) {
  }
  parse_fail(name, line, "malformed number '" + value + "'");
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& name) {
  Scenario sc;
  sc.name = name;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  // two passes so `dim` may appear after polynomials in the file
  std::vector<std::tuple<int, std::string, std::string>> entries;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(name, lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) parse_fail(name, lineno, "empty key or value");
    entries.emplace_back(lineno, key, value);
    if (key == "dim") sc.dim = static_cast<int>(parse_num(value, name, lineno));
  }

  for (const auto& [ln, key, value] : entries) {
    if (key == "dim") {
      continue;
    } else if (key == "run") {
      sc.run = value;
    } else if (key == "seed") {
      sc.seed = static_cast<std::uint64_t>(parse_num(value, name, ln));
    } else if (key == "chart") {
      sc.chart = value;
    } else if (key == "phi") {
      sc.phi = parse_poly(value, sc.dim, name, ln);
    } else if (key == "surface") {
      sc.surface = value;
    } else if (key == "surface_offset") {
      sc.surface_offset = parse_num(value, name, ln);
    } else if (key == "surface_radius") {
      sc.surface_radius = parse_num(value, name, ln);
    } else if (key == "surface_side") {
      if (value == "+" || value == "+1")
        sc.surface_side = +1;
      else if (value == "-" || value == "-1")
        sc.surface_side = -1;
      else
        parse_fail(name, ln, "surface_side must be + or -");
    } else if (key == "boundary") {
      sc.boundary = value == "true" || value == "1";
    } else if (key == "surface_poly") {
      sc.surface_poly = parse_poly(value, sc.dim, name, ln);
    } else if (key == "potential") {
      sc.potential = value;
    } else if (key == "potential_k") {
      sc.potential_k = parse_num(value, name, ln);
    } else if (key == "potential_poly") {
      sc.potential_poly = parse_poly(value, sc.dim, name, ln);
    } else if (key == "potential_poly_plus") {
      sc.potential_plus = parse_poly(value, sc.dim, name, ln);
    } else if (key == "potential_poly_minus") {
      sc.potential_minus = parse_poly(value, sc.dim, name, ln);
    } else if (key == "x0") {
      sc.x0 = parse_vec(value, name, ln);
    } else if (key == "v0") {
      sc.v0 = parse_vec(value, name, ln);
    } else if (key == "y") {
      sc.target_y = parse_vec(value, name, ln);
    } else if (key == "v_guess") {
      sc.v_guess = parse_vec(value, name, ln);
    } else if (key == "T") {
      sc.T = parse_num(value, name, ln);
    } else if (key == "policy") {
      std::istringstream ps(value);
      std::string tok;
      while (ps >> tok) {
        if (tok == "reflect")
          sc.policy.push_back(Decision::Reflect);
        else if (tok == "transmit")
          sc.policy.push_back(Decision::Transmit);
        else
          parse_fail(name, ln, "unknown policy decision '" + tok + "'");
      }
    } else if (key == "policy_overflow") {
      if (value == "reflect")
        sc.overflow = Overflow::AlwaysReflect;
      else if (value == "transmit")
        sc.overflow = Overflow::AlwaysTransmit;
      else if (value == "error")
        sc.overflow = Overflow::ErrorOnExtra;
      else
        parse_fail(name, ln, "unknown policy_overflow '" + value + "'");
    } else if (key == "periodic") {
      sc.periodic = value == "true" || value == "1";
    } else if (key == "base_time") {
      sc.base_time = value == "auto" ? -1.0 : parse_num(value, name, ln);
    } else if (key == "nodes_k") {
      sc.tol.nodes_k = static_cast<int>(parse_num(value, name, ln));
    } else if (key == "hess_h") {
      sc.tol.hess_h = parse_num(value, name, ln);
    } else if (key == "grid_dt") {
      sc.tol.grid_dt = value == "auto" ? 0.0 : parse_num(value, name, ln);
    } else if (key == "rtol") {
      sc.tol.rtol = parse_num(value, name, ln);
    } else if (key == "atol") {
      sc.tol.atol = parse_num(value, name, ln);
    } else if (key == "tol_rank") {
      sc.tol.tol_rank = parse_num(value, name, ln);
    } else if (key == "tol_eig") {
      sc.tol.tol_eig = parse_num(value, name, ln);
    } else if (key == "tol_surface") {
      sc.tol.tol_Y = parse_num(value, name, ln);
    } else if (key == "v_min") {
      sc.tol.v_min = parse_num(value, name, ln);
    } else if (key == "max_events") {
      sc.tol.max_events = static_cast<int>(parse_num(value, name, ln));
    } else {
      parse_fail(name, ln, "unknown key '" + key + "'");
    }
  }
  return sc;
}

Scenario load_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::InputError, "cannot open scenario file " + file);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string base = file;
  const auto slash = base.find_last_of('/');
  if (slash != std::string::npos) base = base.substr(slash + 1);
  return parse_scenario(buf.str(), base);
}

ProblemPtr build_problem(const Scenario& sc) {
  Problem pr;
  pr.tol = sc.tol;

  if (sc.chart == "euclidean") {
    pr.geom = make_chart_euclidean(sc.dim);
  } else if (sc.chart == "polar-flat") {
    pr.geom = make_chart_polar_flat();
  } else if (sc.chart == "sphere-polar") {
    pr.geom = make_chart_sphere_polar();
  } else if (sc.chart == "conformal") {
    if (!sc.phi) throw Error(ErrorCode::InputError, "conformal chart needs phi");
    pr.geom = make_chart_conformal(*sc.phi, sc.dim);
  } else {
    throw Error(ErrorCode::InputError, "unknown chart '" + sc.chart + "'");
  }
  pr.geom.h_g = sc.tol.h_g;

  if (sc.surface == "hyperplane") {
    pr.surface = make_surface_hyperplane(sc.dim, sc.surface_offset, sc.surface_side);
  } else if (sc.surface == "circle" || sc.surface == "sphere-level") {
    pr.surface = make_surface_sphere_level(sc.dim, sc.surface_radius, sc.surface_side);
  } else if (sc.surface == "polynomial") {
    if (!sc.surface_poly) throw Error(ErrorCode::InputError, "polynomial surface needs surface_poly");
    pr.surface = make_surface_polynomial(*sc.surface_poly, sc.surface_side);
  } else if (sc.surface != "none") {
    throw Error(ErrorCode::InputError, "unknown surface '" + sc.surface + "'");
  }
  if (pr.surface) pr.surface->boundary = sc.boundary;

  if (sc.boundary)
    for (Decision d : sc.policy)
      if (d == Decision::Transmit)
        throw Error(ErrorCode::InputError,
                    "transmit decision is not allowed when the hypersurface is a boundary");
  if (sc.boundary && sc.overflow == Overflow::AlwaysTransmit)
    throw Error(ErrorCode::InputError, "transmit overflow under a boundary hypersurface");

  if (sc.potential == "zero") {
    pr.potential = make_potential_zero();
  } else if (sc.potential == "harmonic") {
    pr.potential = make_potential_harmonic(sc.potential_k);
  } else if (sc.potential == "polynomial") {
    if (!sc.potential_poly) throw Error(ErrorCode::InputError, "polynomial potential needs potential_poly");
    pr.potential = make_potential_polynomial(*sc.potential_poly);
  } else if (sc.potential == "piecewise-polynomial") {
    if (!sc.potential_plus || !sc.potential_minus)
      throw Error(ErrorCode::InputError, "piecewise potential needs both side polynomials");
    if (!pr.surface)
      throw Error(ErrorCode::InputError, "piecewise potential needs a hypersurface");
    const Vec center = sc.x0.size() ? sc.x0 : Vec(Vec::Zero(sc.dim));
    validate_piecewise_c1(pr.geom, *pr.surface, *sc.potential_plus, *sc.potential_minus,
                          center, 5.0, sc.seed + 17);
    pr.potential =
        make_potential_piecewise(*sc.potential_plus, *sc.potential_minus, pr.surface->rho);
  } else {
    throw Error(ErrorCode::InputError, "unknown potential '" + sc.potential + "'");
  }

  if (sc.x0.size() != sc.dim)
    throw Error(ErrorCode::InputError, "x0 missing or of wrong dimension");
  if (sc.run == "solve") {
    if (sc.v_guess.size() != sc.dim && sc.v0.size() != sc.dim)
      throw Error(ErrorCode::InputError, "solve run needs v_guess or v0");
  } else if (sc.v0.size() != sc.dim) {
    throw Error(ErrorCode::InputError, "v0 missing or of wrong dimension");
  }
  if (!(sc.T > 0)) throw Error(ErrorCode::InputError, "T must be positive");

  return std::make_shared<const Problem>(std::move(pr));
}

namespace {

Json scenario_echo(const Scenario& sc) {
  Json j = Json::object();
  j.set("name", Json::str(sc.name));
  j.set("run", Json::str(sc.run));
  j.set("seed", Json::integer(static_cast<long long>(sc.seed)));
  j.set("chart", Json::str(sc.chart));
  j.set("dim", Json::integer(sc.dim));
  j.set("surface", Json::str(sc.surface));
  j.set("boundary", Json::boolean(sc.boundary));
  j.set("potential", Json::str(sc.potential));
  if (sc.x0.size()) j.set("x0", Json::vec(sc.x0));
  if (sc.v0.size()) j.set("v0", Json::vec(sc.v0));
  j.set("T", Json::num(sc.T));
  Json tolj = Json::object();
  tolj.set("rtol", Json::num(sc.tol.rtol));
  tolj.set("atol", Json::num(sc.tol.atol));
  tolj.set("tol_surface", Json::num(sc.tol.tol_Y));
  tolj.set("v_min", Json::num(sc.tol.v_min));
  tolj.set("tol_rank", Json::num(sc.tol.tol_rank));
  tolj.set("tol_eig", Json::num(sc.tol.tol_eig));
  tolj.set("nodes_k", Json::integer(sc.tol.nodes_k));
  tolj.set("hess_h", Json::num(sc.tol.hess_h));
  tolj.set("grid_dt", Json::num(sc.tol.grid_dt));
  tolj.set("max_events", Json::integer(sc.tol.max_events));
  j.set("tolerances", std::move(tolj));
  return j;
}

Json event_table(const ReflectedPath& path) {
  Json events = Json::array();
  const auto& pr = *path.problem;
  for (const auto& ev : path.events) {
    Json e = Json::object();
    e.set("time", Json::num(ev.time));
    e.set("kind", Json::str(ev.kind == EventKind::Reflection ? "reflection" : "kink"));
    e.set("point", Json::vec(ev.point));
    e.set("v_in", Json::vec(ev.v_in));
    e.set("v_out", Json::vec(ev.v_out));
    if (ev.kind == EventKind::Reflection && pr.surface) {
      const Vec N = unit_normal(pr.geom, *pr.surface, ev.point);
      const double vn = inner(pr.geom, ev.point, ev.v_in, N);
      const double speed = g_norm(pr.geom, ev.point, ev.v_in);
      e.set("incidence_angle", Json::num(std::acos(std::min(1.0, std::abs(vn) / speed))));
    }
    events.push(std::move(e));
  }
  return events;
}

Json path_summary(const ReflectedPath& path) {
  Json j = Json::object();
  const auto d = diagnose(path);
  j.set("total_time", Json::num(path.total_time));
  j.set("segments", Json::integer(static_cast<long long>(path.segments.size())));
  j.set("energy", Json::num(path.energy(0.0)));
  j.set("energy_drift", Json::num(d.energy_drift));
  j.set("max_position_gap", Json::num(d.max_position_gap));
  j.set("max_reflection_defect", Json::num(d.max_reflection_defect));
  j.set("max_kink_defect", Json::num(d.max_kink_defect));
  j.set("end_point", Json::vec(path.position(path.total_time, Side::Minus)));
  j.set("end_velocity", Json::vec(path.velocity(path.total_time, Side::Minus)));
  j.set("action", Json::num(action(path)));
  j.set("events", event_table(path));
  return j;
}

Json conjugate_table(const ConjugateScan& scan) {
  Json arr = Json::array();
  for (const auto& c : scan.points) {
    Json e = Json::object();
    e.set("time", Json::num(c.time));
    e.set("multiplicity", Json::integer(c.multiplicity));
    e.set("sign_change", Json::boolean(c.sign_change));
    arr.push(std::move(e));
  }
  return arr;
}

Json index_report_json(const IndexReport& rep) {
  Json j = Json::object();
  j.set("k", Json::integer(rep.k));
  j.set("dimension", Json::integer(rep.eigenvalues.size()));
  j.set("index", Json::integer(rep.index));
  j.set("nullity", Json::integer(rep.nullity));
  j.set("positive", Json::integer(rep.positive));
  j.set("asymmetry", Json::num(rep.asymmetry));
  j.set("tol_eig_abs", Json::num(rep.tol_eig_abs));
  j.set("eigenvalues", Json::vec(rep.eigenvalues));
  return j;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::SelfConjugate: return 3;
    case ErrorCode::InputError:
    case ErrorCode::TransmitForbidden:
    case ErrorCode::PolicyExhausted:
    case ErrorCode::OffSurface:
    case ErrorCode::NotTangent:
    case ErrorCode::InvalidField:
    case ErrorCode::DegenerateMetric: return 4;
    default: return 5;
  }
}

ReflectedPath make_path(const Scenario& sc, const ProblemPtr& problem) {
  EventPolicy policy{sc.policy, sc.overflow};
  if (sc.periodic) return refine_periodic_orbit(problem, sc.x0, sc.v0, sc.T, policy);
  return shoot(problem, sc.x0, sc.v0, sc.T, policy);
}

}  // namespace

RunOutcome run_scenario(const Scenario& sc, bool with_timing) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  out.report = Json::object();
  out.report.set("scenario", scenario_echo(sc));

  try {
    const ProblemPtr problem = build_problem(sc);
    EventPolicy policy{sc.policy, sc.overflow};

    if (sc.run == "shoot") {
      const auto path = make_path(sc, problem);
      out.report.set("path", path_summary(path));
      Rng rng(sc.seed);
      std::vector<ProbeField> probes;
      for (int i = 0; i < 20; ++i)
        probes.push_back(make_admissible_probe(path, rng.uniform_vec(sc.dim, -1.0, 1.0),
                                               rng.uniform_vec(sc.dim, -1.0, 1.0)));
      out.report.set("criticality_residual", Json::num(criticality_residual(path, probes)));
      out.exit_code = 0;
    } else if (sc.run == "solve") {
      if (sc.target_y.size() != sc.dim)
        throw Error(ErrorCode::InputError, "solve run needs target y");
      const Vec guess = sc.v_guess.size() == sc.dim ? sc.v_guess : sc.v0;
      const auto path = two_point_solve(problem, sc.x0, sc.target_y, guess, sc.T, policy);
      out.report.set("path", path_summary(path));
      out.report.set("endpoint_miss",
                     Json::num((path.position(sc.T, Side::Minus) - sc.target_y).norm()));
      out.report.set("v0_solved", Json::vec(path.velocity(0.0)));
      out.exit_code = 0;
    } else if (sc.run == "index-fixed") {
      const auto path = make_path(sc, problem);
      out.report.set("path", path_summary(path));
      const auto scan3 = index_stability_scan(path, sc.tol.nodes_k, BoundaryCondition::Fixed,
                                              sc.tol.tol_eig);
      Json ks = Json::array();
      for (const auto& r : scan3.reports) ks.push(index_report_json(r));
      out.report.set("index_form", std::move(ks));
      out.report.set("index_stable", Json::boolean(scan3.stable));
      const auto res = fixed_endpoint_index_theorem(path, sc.tol.nodes_k, sc.tol.tol_eig);
      out.report.set("conjugate_points", conjugate_table(res.scan));
      Json thm = Json::object();
      thm.set("index", Json::integer(res.report.index));
      thm.set("conjugate_count", Json::integer(res.conjugate_count));
      thm.set("endpoint_multiplicity", Json::integer(res.endpoint_multiplicity));
      thm.set("pass", Json::boolean(res.pass));
      out.report.set("fixed_index_theorem", std::move(thm));
      out.exit_code = res.pass ? 0 : 2;
      if (!scan3.stable) out.exit_code = 5;
    } else if (sc.run == "index-periodic") {
      const auto orbit = make_path(sc, problem);
      PeriodicOptions opts;
      opts.k0 = sc.tol.nodes_k;
      opts.tol_eig = sc.tol.tol_eig;
      opts.hess_h = sc.tol.hess_h;
      opts.base_time = sc.base_time;
      const auto rep = periodic_index_theorem(problem, orbit, policy, opts);
      Json thm = Json::object();
      thm.set("base_time", Json::num(rep.base_time));
      thm.set("base_point", Json::vec(rep.base_point));
      thm.set("self_conjugate", Json::boolean(rep.self_conjugate));
      thm.set("conjugacy_ratio", Json::num(rep.conjugacy_ratio));
      if (!rep.self_conjugate) {
        thm.set("periodic_index", Json::integer(rep.periodic_index));
        thm.set("periodic_nullity", Json::integer(rep.periodic_nullity));
        thm.set("fixed_index", Json::integer(rep.fixed_index));
        thm.set("concavity_index", Json::integer(rep.concavity_index));
        thm.set("conjugate_count", Json::integer(rep.conjugate_count));
        thm.set("identity_holds", Json::boolean(rep.identity_holds));
        thm.set("periodic_form", index_report_json(rep.periodic_report));
        thm.set("fixed_form", index_report_json(rep.fixed_report));
        Json hj = Json::object();
        hj.set("h", Json::num(rep.hessian.h));
        hj.set("eigenvalues", Json::vec(rep.hessian.eigenvalues));
        hj.set("index", Json::integer(rep.hessian.index));
        hj.set("nullity", Json::integer(rep.hessian.nullity));
        hj.set("zero_tol", Json::num(rep.hessian.zero_tol));
        thm.set("action_hessian", std::move(hj));
      }
      out.report.set("periodic_index_theorem", std::move(thm));
      out.exit_code = rep.self_conjugate ? 3 : (rep.identity_holds ? 0 : 2);
    } else if (sc.run == "emit-plot") {
      const auto path = make_path(sc, problem);
      out.report.set("path", path_summary(path));
      const auto scan = conjugate_points(path, sc.tol.grid_dt, sc.tol.tol_rank);
      out.report.set("conjugate_points", conjugate_table(scan));
      Json det = Json::array();
      for (const auto& [t, d] : scan.det_samples) {
        Json row = Json::array();
        row.push(Json::num(t));
        row.push(Json::num(d));
        det.push(std::move(row));
      }
      out.report.set("det_samples", std::move(det));
      const auto rep = assemble_index_form(path, sc.tol.nodes_k, BoundaryCondition::Fixed,
                                           sc.tol.tol_eig);
      out.report.set("index_form", index_report_json(rep));
      out.exit_code = 0;
    } else {
      throw Error(ErrorCode::InputError, "unknown run type '" + sc.run + "'");
    }
    out.report.set("status", Json::str(out.exit_code == 0 ? "ok"
                                       : out.exit_code == 2 ? "theorem-failed"
                                       : out.exit_code == 3 ? "degenerate"
                                                            : "error"));
  } catch (const Error& e) {
    out.exit_code = exit_code_for(e);
    Json err = Json::object();
    err.set("code", Json::str(error_code_name(e.code())));
    err.set("message", Json::str(e.what()));
    out.report.set("error", std::move(err));
    out.report.set("status", Json::str(out.exit_code == 3 ? "degenerate"
                                       : out.exit_code == 4 ? "input-error"
                                                            : "numerical-error"));
  }

  if (with_timing) {
    const auto stop = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
    out.report.set("timing_ms", Json::num(ms));
  }
  return out;
}

std::string emit_json(const RunOutcome& outcome) { return outcome.report.dump(); }

namespace {

void flatten_csv(const Json& j, const std::string& prefix, std::string& out) {
  switch (j.kind()) {
    case Json::Kind::Object:
      for (const auto& [k, v] : j.members())
        flatten_csv(v, prefix.empty() ? k : prefix + "." + k, out);
      break;
    case Json::Kind::Array: {
      int i = 0;
      for (const auto& v : j.items()) flatten_csv(v, prefix + "[" + std::to_string(i++) + "]", out);
      break;
    }
    case Json::Kind::Number:
    case Json::Kind::Int:
      out += prefix + "," + format_double(j.num_value()) + "\n";
      break;
    case Json::Kind::Bool:
      out += prefix + "," + std::string(j.bool_value() ? "true" : "false") + "\n";
      break;
    case Json::Kind::String:
      out += prefix + "," + j.str_value() + "\n";
      break;
    case Json::Kind::Null:
      out += prefix + ",null\n";
      break;
  }
}

void emit_eigen_block(const Json& form, std::string& out) {
  const Json* k = form.find("k");
  const Json* eigs = form.find("eigenvalues");
  if (!eigs) return;
  out += "\n# eigenvalues";
  if (k) out += " k=" + std::to_string(k->int_value());
  out += "\n";
  for (const auto& e : eigs->items()) out += format_double(e.num_value()) + "\n";
}

}  // namespace

std::string emit_csv(const RunOutcome& outcome) {
  std::string out = "key,value\n";
  flatten_csv(outcome.report, "", out);
  return out;
}

std::string emit_plot_data(const RunOutcome& outcome) {
  std::string out;
  if (const Json* det = outcome.report.find("det_samples")) {
    out += "# t  det_B\n";
    for (const auto& row : det->items()) {
      out += format_double(row.items()[0].num_value()) + "  " +
             format_double(row.items()[1].num_value()) + "\n";
    }
  }
  if (const Json* form = outcome.report.find("index_form")) {
    if (form->kind() == Json::Kind::Array)
      for (const auto& f : form->items()) emit_eigen_block(f, out);
    else
      emit_eigen_block(*form, out);
  }
  if (const Json* thm = outcome.report.find("periodic_index_theorem")) {
    if (const Json* pf = thm->find("periodic_form")) emit_eigen_block(*pf, out);
    if (const Json* ff = thm->find("fixed_form")) emit_eigen_block(*ff, out);
    if (const Json* hj = thm->find("action_hessian")) emit_eigen_block(*hj, out);
  }
  if (out.empty()) out = "# no plottable data in this report\n";
  return out;
}

}  // namespace rjf
