#pragma once
// The built-in verification suite behind `evotree verify`: every acceptance
// criterion at desk scale, plus validation of a finite-model fixture file.

#include <functional>
#include <string>
#include <vector>

namespace evotree::acceptance {

struct CriterionResult {
  std::string id;  // "1".."17", or "F" for the fixture check
  std::string name;
  bool pass = false;
  std::string measured;
  std::string tolerance;
  double seconds = 0.0;  // wall time; not part of the printed report
};

struct VerifyOptions {
  // Finite model JSON to validate; empty uses a built-in valid model.
  std::string fixture_path;
  // Criterion ids to run; empty runs all.
  std::vector<std::string> only;
};

std::vector<std::string> criterion_ids();

using Reporter = std::function<void(const CriterionResult&)>;

/// Runs the selected criteria in order, calling `on_result` after each.
std::vector<CriterionResult> verify(const VerifyOptions& options = {}, const Reporter& on_result = {});

/// "PASS  9  tiebreaker share 1/(t+1) | measured ... | tolerance ..."
std::string format_line(const CriterionResult& r);

}  // namespace evotree::acceptance
