#pragma once

#include <string>
#include <vector>

namespace opno::tools {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Invariant suites: transform round trips, fast-vs-naive oracles, compact
/// basis boundary residuals and round trips, model boundary guarantee,
/// gradient check, container round trip. `quick` shrinks sizes so the run
/// stays well under ten seconds.
///
/// Setting OPNO_SELFTEST_FAULT=<check name> perturbs the named check's input
/// by 1e-6 so the harness itself can be shown to fail; "all" perturbs every
/// check.
std::vector<CheckResult> run_selftest(bool quick, unsigned long long seed);

}  // namespace opno::tools
