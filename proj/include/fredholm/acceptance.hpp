#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fredholm {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  /// Criteria to run (1..10); empty runs all.
  std::vector<int> only;
  int threads = 0;
  /// Counterexample candidates are appended here (JSON lines) before any
  /// failure is reported.
  std::string candidate_path = "counterexample_candidates.jsonl";
  /// Progress lines go here when non-null.
  std::ostream* log = nullptr;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});

/// "PASS  C<id> <name>: <detail>" or "FAIL ...".
std::string format_result(const CriterionResult& r);

}  // namespace fredholm
