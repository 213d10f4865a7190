#pragma once

#include <string>
#include <vector>

#include "model.hpp"

namespace tf {

// One named verification. `pass` already folds in the comparison, which is
// recorded in `rule` so the report reads on its own.
struct CheckResult {
    std::string name;
    int criterion = 0;
    bool pass = false;
    double metric = 0;
    double tolerance = 0;
    std::string rule;    // "<=", ">=", ">" ...
    std::string detail;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<CheckResult> checks;
    double seconds = 0, budget_seconds = 0;  // wall time is kept out of the JSON report
    bool pass() const;
};

struct CertifyOptions {
    ModelParams params;      // used by every check that is not tied to a fixed reference set
    double tol_scale = 1.0;  // multiplies every numeric tolerance
    unsigned long long seed = 20240611ULL;
};

constexpr int kCriterionCount = 12;
std::string criterion_title(int id);

// Runs the checks of one criterion (1..12).
CriterionResult certify_criterion(int id, const CertifyOptions& opt);
std::vector<CriterionResult> certify_all(const CertifyOptions& opt);

std::string certify_json(const std::vector<CriterionResult>& results);

}  // namespace tf
