// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <cstdlib>
#include <iostream>

#include "colvar/acceptance.hpp"

int main(int argc, char** argv) {
  colvar::acceptance::SuiteOptions opt;
  if (argc > 1) opt.seed = std::strtoull(argv[1], nullptr, 0);
  auto out = colvar::acceptance::run_suite(opt, [](const colvar::acceptance::CriterionResult& c) {
    std::cout << colvar::acceptance::format_line(c) << std::endl;
  });
  for (const auto& w : out.warnings) std::cout << "warning: " << w << "\n";
  int failed = 0;
  for (const auto& c : out.criteria) failed += c.pass ? 0 : 1;
  std::cout << (out.criteria.size() - failed) << "/" << out.criteria.size() << " criteria passed in " << out.seconds
            << " s" << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
