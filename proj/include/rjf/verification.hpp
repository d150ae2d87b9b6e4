#pragma once
#include "rjf/report.hpp"
#include "rjf/scenario.hpp"

namespace rjf {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string details;  // the numbers behind the flag
};

struct VerificationReport {
  std::vector<CriterionResult> criteria;
  bool all_pass() const;
  Json to_json() const;
};

// Runs the built-in oracle suite end to end. `jobs` parallelizes the
// randomized periodic sweep; identical results regardless of job count.
VerificationReport run_verification_suite(int jobs = 1);

}  // namespace rjf
