#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tclevy/common.hpp"
#include "tclevy/fluctuation.hpp"
#include "tclevy/levy.hpp"
#include "tclevy/rate.hpp"

namespace tclevy {

struct H1Record {
    bool holds = false;
    enum class Branch { NegativeMean, ZeroMeanIntegral, FamilyFact, Fails } branch =
        Branch::Fails;
    std::string detail;
};

// (H1): negative mean, or zero mean with a finite descending-ladder mean.
// Zero-mean compound Poisson models with jumps on both sides evaluate the
// explicit nested integral; the other zero-mean families use exact family
// facts. Throws Undecidable outside every handled case.
H1Record check_H1(const LevyModel& model);

struct IntegralReport {
    bool finite = false;
    double value = kInf;
    std::string detail;
};

// Integral test for entrance: int^inf nu_+(y)/R(y) dy, decided symbolically
// from the tail classes, with the renewal evaluator as quadrature weight.
IntegralReport entrance_test(const LevyModel& model, const RateFunction& R);

// Integral test for a regular boundary: int^inf e^{theta y}/R(y) dy.
// theta must lie in the feasible set of cramer_theta.
IntegralReport regular_test(const LevyModel& model, const RateFunction& R,
                            double theta);

enum class Verdict {
    Entrance,
    RegularContinuous,
    RegularJumpIn,
    NoExtension,
    Indeterminate
};

std::string verdict_name(Verdict v);

struct BoundaryReport {
    H1Record h1;
    CramerInfo h2;
    IntegralReport entrance_integral; // meaningful when entrance branch ran
    std::vector<std::pair<double, IntegralReport>> regular_integrals;
    Verdict verdict = Verdict::Indeterminate;
    double theta_star = 0.0;          // RegularContinuous root
    double theta_lo = 0.0;            // RegularJumpIn interval (open at lo)
    double theta_hi = 0.0;
    bool theta_hi_closed = false;
    std::string reason;
    bool explosion_expected = false;

    std::string to_json() const;
};

BoundaryReport classify_boundary(const LevyModel& model, const RateFunction& R);

} // namespace tclevy
