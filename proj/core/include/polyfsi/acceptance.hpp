#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polyfsi {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the full property suite at the desk scale (disk 24x48, ball 16x24,
/// dt 1e-3) and returns one result per criterion. Scratch files (CSV
/// comparisons, checkpoints) go under `scratch_dir`.
std::vector<CriterionResult> run_acceptance_suite(const std::string& scratch_dir);

/// Prints one pass/fail line per criterion; returns true when all passed.
bool print_acceptance_table(const std::vector<CriterionResult>& results, std::ostream& os);

}  // namespace polyfsi
