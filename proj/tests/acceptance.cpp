// Acceptance suite: runs every criterion of the built-in oracle set and
// prints one PASS/FAIL line per criterion.
#include <cstdio>

#include "rjf/verification.hpp"

int main() {
  const rjf::VerificationReport rep = rjf::run_verification_suite(/*jobs=*/1);
  for (const auto& c : rep.criteria)
    std::printf("[%s] criterion %2d: %s — %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                c.details.c_str());
  std::printf("%s\n", rep.all_pass() ? "ACCEPTANCE: all criteria passed"
                                     : "ACCEPTANCE: FAILURES PRESENT");
  return rep.all_pass() ? 0 : 1;
}
