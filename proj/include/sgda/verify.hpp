#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace sgda::verify {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;  // measured values
};

struct SuiteResult {
  std::string suite;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0.0;
  bool pass() const;
};

/// Registered suites in acceptance order (without "all").
const std::vector<std::string>& suite_names();
bool has_suite(const std::string& name);
/// Runs one suite; throws ConfigError for an unknown name.
SuiteResult run_suite(const std::string& name);

/// One line per check plus a summary line for the suite.
void print_suite(std::ostream& os, const SuiteResult& r);

}  // namespace sgda::verify
