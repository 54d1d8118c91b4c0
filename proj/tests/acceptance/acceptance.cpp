// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. argv[1], if given, receives the training log of the overfit run.

#include <iostream>
#include <string>

#include "arraysep/verify/checks.h"

int main(int argc, char** argv) {
  const std::string log = argc > 1 ? argv[1] : "";
  const auto results = arraysep::verify::run_suite(true, std::cout, log);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << " (" << results.size()
            << " criteria)" << std::endl;
  return failed == 0 ? 0 : 1;
}
