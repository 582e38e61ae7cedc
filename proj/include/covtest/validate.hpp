#pragma once

#include <string>
#include <vector>

namespace covtest {

/// Outcome of one embedded validation suite.
struct SuiteReport {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  std::string failure;  ///< first failing property, empty when passed
};

/// Suite names in execution order: ustat, theta, psi, eigen, dist.
std::vector<std::string> validation_suites();

/// Runs the named suites (all when empty). `inject_fault` names a suite
/// whose computed values are deliberately perturbed, so the harness itself
/// can be checked. Config error for unknown names.
std::vector<SuiteReport> run_validation(const std::vector<std::string>& suites = {},
                                        const std::string& inject_fault = {});

}  // namespace covtest
