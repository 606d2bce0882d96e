#include <cstdlib>
#include <iostream>
#include <string>

#include "mkm/cli.hpp"

// One PASS/FAIL line per acceptance criterion; nonzero exit if any fails.
int main(int argc, char** argv) {
  std::uint64_t seed = 20240611;
  if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);
  auto results = mkm::run_acceptance(seed, mkm::cli::print);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << results.size() - failed << "/" << results.size() << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
