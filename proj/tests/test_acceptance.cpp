// Acceptance harness: runs every criterion and prints one line per result.
// The seed can be overridden through the first argument.

#include <cstdlib>
#include <iostream>

#include "etrforge/corpus.hpp"

int main(int argc, char** argv) {
  unsigned long seed = 1;
  if (argc > 1) seed = std::strtoul(argv[1], nullptr, 10);
  auto results = etrforge::corpus::run_acceptance(seed);
  std::string table;
  bool ok = etrforge::corpus::print_acceptance_table(results, &table);
  std::cout << table;
  return ok ? 0 : 1;
}
