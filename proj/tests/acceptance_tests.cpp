// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <cstdlib>
#include <iostream>
#include <string>

#include "fredholm/acceptance.hpp"

int main(int argc, char** argv) {
  fredholm::AcceptanceOptions opt;
  for (int i = 1; i < argc; ++i) opt.only.push_back(std::atoi(argv[i]));
  opt.log = &std::cerr;
  const auto results = fredholm::run_acceptance(opt);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << fredholm::format_result(r) << '\n';
    if (!r.pass) ++failed;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << results.size() - failed << '/' << results.size()
            << std::endl;
  return failed ? 1 : 0;
}
