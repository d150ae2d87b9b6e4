#pragma once
#include <optional>
#include <string>

#include "rjf/morse.hpp"
#include "rjf/report.hpp"

namespace rjf {

// One experiment description, parsed from a key = value text file.
struct Scenario {
  std::string name = "scenario";
  std::string run = "shoot";  // shoot | solve | index-fixed | index-periodic | emit-plot
  std::uint64_t seed = 1;

  std::string chart = "euclidean";
  int dim = 2;
  std::optional<Polynomial> phi;  // conformal factor exponent

  std::string surface = "none";  // none | hyperplane | circle | polynomial
  double surface_offset = 0.0;   // hyperplane: rho = x1 - c
  double surface_radius = 1.0;   // circle level set
  int surface_side = +1;         // side of Y the trajectory occupies
  bool boundary = false;
  std::optional<Polynomial> surface_poly;

  std::string potential = "zero";  // zero | harmonic | polynomial | piecewise-polynomial
  double potential_k = 1.0;
  std::optional<Polynomial> potential_poly, potential_plus, potential_minus;

  Vec x0, v0;
  double T = 1.0;
  Vec target_y, v_guess;  // two-point runs

  std::vector<Decision> policy;
  Overflow overflow = Overflow::AlwaysReflect;

  bool periodic = false;    // refine (x0, v0, T) into a closed orbit first
  double base_time = -1.0;  // periodic base point; < 0 picks the default

  Tolerances tol;  // numeric overrides, echoed in reports
};

Scenario parse_scenario(const std::string& text, const std::string& name);
Scenario load_scenario(const std::string& file);

// Instantiates geometry/surface/potential from the registries; validates the
// scenario invariants (names, C1 matching, boundary vs transmit decisions).
ProblemPtr build_problem(const Scenario& sc);

// Exit codes: 0 all checks pass, 2 theorem check failed, 3 degenerate
// scenario, 4 input error, 5 numerical inconclusiveness.
struct RunOutcome {
  int exit_code = 0;
  Json report;
};

RunOutcome run_scenario(const Scenario& sc, bool with_timing = false);

// Report renderers.
std::string emit_json(const RunOutcome& outcome);
std::string emit_csv(const RunOutcome& outcome);
std::string emit_plot_data(const RunOutcome& outcome);

}  // namespace rjf
