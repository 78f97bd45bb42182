#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace etrforge::corpus {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Runs the twelve acceptance criteria with the given seed for the randomized
// parts. Deterministic for a fixed seed.
std::vector<CriterionResult> run_acceptance(uint64_t seed);

// Formats one line per criterion plus a summary; returns true iff all passed.
bool print_acceptance_table(const std::vector<CriterionResult>& results, std::string* out);

}  // namespace etrforge::corpus
