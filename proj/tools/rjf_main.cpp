#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rjf/scenario.hpp"
#include "rjf/verification.hpp"

namespace {

struct CommonArgs {
  std::string scenario_file;
  std::string out_file;
  std::string format = "json";
  long long seed = -1;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool need_scenario = true) {
  auto* opt = cmd->add_option("--scenario", args.scenario_file, "scenario file");
  if (need_scenario) opt->required();
  cmd->add_option("--out", args.out_file, "output file (default: stdout)");
  cmd->add_option("--format", args.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", args.seed, "override the scenario seed");
  cmd->add_flag("--timing", args.timing, "include timing in the report");
}

void write_output(const std::string& text, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_file);
  if (!out) {
    std::cerr << "cannot open output file " << out_file << "\n";
    std::exit(4);
  }
  out << text;
}

int run_verb(const std::string& verb, const CommonArgs& args) {
  rjf::Scenario sc;
  try {
    sc = rjf::load_scenario(args.scenario_file);
  } catch (const rjf::Error& e) {
    std::cerr << e.what() << "\n";
    return 4;
  }
  sc.run = verb;
  if (args.seed >= 0) sc.seed = static_cast<std::uint64_t>(args.seed);
  const rjf::RunOutcome outcome = rjf::run_scenario(sc, args.timing);
  if (verb == "emit-plot")
    write_output(rjf::emit_plot_data(outcome), args.out_file);
  else if (args.format == "csv")
    write_output(rjf::emit_csv(outcome), args.out_file);
  else
    write_output(rjf::emit_json(outcome), args.out_file);
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflected-trajectory mechanics: shooting, linearized fields, index counts"};
  app.require_subcommand(1);

  CommonArgs shoot_args, solve_args, fixed_args, periodic_args, plot_args, verify_args;
  int jobs = 1;

  auto* cmd_shoot = app.add_subcommand("shoot", "integrate a trajectory and report events");
  add_common(cmd_shoot, shoot_args);
  auto* cmd_solve = app.add_subcommand("solve", "two-point solve to the scenario target");
  add_common(cmd_solve, solve_args);
  auto* cmd_fixed =
      app.add_subcommand("index-fixed", "fixed-endpoint index versus conjugate-point count");
  add_common(cmd_fixed, fixed_args);
  auto* cmd_periodic =
      app.add_subcommand("index-periodic", "periodic index identity at a closed orbit");
  add_common(cmd_periodic, periodic_args);
  auto* cmd_plot = app.add_subcommand("emit-plot", "columnar det-scan and eigenvalue data");
  add_common(cmd_plot, plot_args);
  auto* cmd_verify = app.add_subcommand("verify-all", "run the built-in oracle suite");
  add_common(cmd_verify, verify_args, /*need_scenario=*/false);
  cmd_verify->add_option("--jobs", jobs, "parallel jobs for the randomized sweep");

  CLI11_PARSE(app, argc, argv);

  if (cmd_verify->parsed()) {
    const rjf::VerificationReport rep = rjf::run_verification_suite(jobs);
    for (const auto& c : rep.criteria)
      std::printf("[%s] criterion %2d: %s — %s\n", c.pass ? "PASS" : "FAIL", c.id,
                  c.name.c_str(), c.details.c_str());
    if (!verify_args.out_file.empty())
      write_output(rep.to_json().dump(), verify_args.out_file);
    return rep.all_pass() ? 0 : 2;
  }
  if (cmd_shoot->parsed()) return run_verb("shoot", shoot_args);
  if (cmd_solve->parsed()) return run_verb("solve", solve_args);
  if (cmd_fixed->parsed()) return run_verb("index-fixed", fixed_args);
  if (cmd_periodic->parsed()) return run_verb("index-periodic", periodic_args);
  if (cmd_plot->parsed()) return run_verb("emit-plot", plot_args);
  return 4;
}
