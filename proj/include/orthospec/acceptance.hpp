#pragma once

#include <functional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace orthospec {

struct CriterionResult {
  std::string id;  // "AC1" ...
  std::string title;
  bool passed = false;
  double seconds = 0.0;
  double limit_seconds = 0.0;
  std::vector<std::string> details;  // one line per measured quantity
};

struct AcceptanceOptions {
  std::set<std::string> only;  // empty: all criteria
  std::ostream* log = nullptr;  // per-quantity detail lines as they are measured
};

/// Runs the acceptance criteria in order. A criterion passes when every
/// measured quantity is inside its tolerance and it finished inside its
/// time budget; an exception fails that criterion only.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});

/// "PASS AC1 <title> (1.2 s / 10 s)".
std::string summary_line(const CriterionResult& r);

}  // namespace orthospec
