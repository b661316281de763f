#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

namespace syncap::harness {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Assertions an experiment embeds; the CLI exit code is their conjunction.
struct Report {
  std::string experiment;
  std::vector<Check> checks;

  bool check(std::string name, bool passed, std::string detail = {}) {
    checks.push_back({std::move(name), passed, std::move(detail)});
    return passed;
  }
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
  void print(std::ostream& out) const {
    for (const auto& c : checks)
      out << (c.passed ? "PASS " : "FAIL ") << experiment << ": " << c.name
          << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
  }
};

}  // namespace syncap::harness
