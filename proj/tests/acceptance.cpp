// Acceptance run: one line per criterion, then the per-check detail.
// Exit status is nonzero if any criterion fails.

#include <cstdio>
#include <iostream>

#include "red/harness/suites.hpp"

using namespace red::harness;

int main() {
  int failed = 0;
  std::vector<SuiteReport> reports;
  for (const auto& entry : suite_registry()) reports.push_back(run_suite(entry, kDefaultVerifySeed));
  for (auto& r : reports) {
    const bool in_time = r.runtime_limit <= 0.0 || r.runtime < r.runtime_limit;
    const bool ok = r.passed() && in_time;
    if (!ok) ++failed;
    char runtime[64];
    if (r.runtime_limit > 0.0)
      std::snprintf(runtime, sizeof runtime, "%.2f s (limit %.0f s)", r.runtime, r.runtime_limit);
    else
      std::snprintf(runtime, sizeof runtime, "%.2f s", r.runtime);
    std::cout << "AC" << r.criterion << (r.criterion < 10 ? "  " : " ") << (ok ? "PASS" : "FAIL") << "  " << r.title
              << " [" << r.suite << "]  " << runtime << "\n";
  }
  std::cout << "\n";
  for (const auto& r : reports) {
    std::cout << "AC" << r.criterion << " " << r.suite << "\n";
    for (const auto& c : r.checks)
      std::cout << "    " << (c.passed ? "ok   " : "FAIL ") << c.name << " = " << format_number(c.measured) << "  (bound "
                << format_number(c.tolerance) << ")" << (c.note.empty() ? "" : "  " + c.note) << "\n";
  }
  std::cout << "\n" << (reports.size() - static_cast<std::size_t>(failed)) << "/" << reports.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
