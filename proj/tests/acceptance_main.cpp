// Runs every acceptance criterion and prints one line per criterion.
// Optional arguments select criterion ids.

#include "gwldp/verify/acceptance.hpp"

#include <algorithm>
#include <iostream>
#include <string>
#include <thread>

int main(int argc, char** argv) {
  gwldp::verify::AcceptanceOptions options;
  for (int i = 1; i < argc; ++i) options.only.push_back(std::stoi(argv[i]));
  options.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto results = gwldp::verify::run_acceptance(options);
  gwldp::verify::print_results(std::cout, results);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " failed" : std::string("acceptance: all passed"))
            << "\n";
  return failed ? 1 : 0;
}
