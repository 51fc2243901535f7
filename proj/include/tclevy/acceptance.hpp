#pragma once

#include <string>
#include <vector>

namespace tclevy {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// Runs the numbered acceptance checks (all eleven when ids is empty) and
// returns one result per criterion, in id order. A check that throws is
// reported as a failure with the message in detail rather than propagating.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {});

} // namespace tclevy
