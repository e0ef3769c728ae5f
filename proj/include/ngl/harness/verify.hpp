#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ngl::harness {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  // Multiplies the step size of every envelope run. Anything far from 1 is a
  // deliberate corruption the suite should catch.
  double step_scale = 1.0;
};

std::vector<CheckResult> run_verify_suite(const VerifyOptions& options = {});

// Prints one line per check and returns 0 iff all pass.
int cli_verify(const VerifyOptions& options, std::ostream& out);

}  // namespace ngl::harness
