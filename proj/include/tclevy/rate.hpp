#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace tclevy {

// Asymptotic order of an expression on one side: f(y) ~ c * y^p * e^{q*y} as
// y -> +infinity (the -infinity side is expressed through y = -x). c may be
// negative for intermediate subexpressions; a valid rate function needs
// positive classes on both sides when they are known at all.
struct TailClass {
    bool known = false;
    double c = 0.0;
    double p = 0.0;
    double q = 0.0;
};

enum class IntegralVerdict { Finite, Divergent, Unknown };

struct IntegralDecision {
    IntegralVerdict verdict = IntegralVerdict::Unknown;
    double value = 0.0; // finite part when verdict == Finite
    std::string detail; // why: symbolic rule fired or numeric fallback used
};

// Rate function R: grammar with constants, x, + - * / ^, exp, log, max, pow.
// parse() validates positivity on a wide grid and boundedness toward
// -infinity (the standing requirement liminf_{x->-inf} 1/R(x) > 0).
class RateFunction {
  public:
    static RateFunction parse(const std::string& expression);

    double operator()(double x) const;
    const std::string& expression() const { return expr_; }

    TailClass tail_pos() const { return tail_pos_; }
    TailClass tail_neg() const { return tail_neg_; }

    // x -> R(x + z); tail orders adjusted, no revalidation needed.
    RateFunction shifted(double z) const;

    std::string condition_note() const;

  private:
    friend struct RateCompiler;

    RateFunction() = default;

    struct Op {
        int code = 0;
        double value = 0.0;
    };
    std::string expr_;
    std::vector<Op> program_;
    double offset_ = 0.0;
    TailClass tail_pos_;
    TailClass tail_neg_;
    mutable std::vector<double> stack_;
};

// phi(b) = integral of 1/R over [b, +inf); +infinity when divergent.
// Throws UnknownTail if the order of R is unknown and the numerical
// extrapolation fallback is inconclusive.
double phi(const RateFunction& R, double b);

// Inverse of phi on (0, phi(-inf)); requires phi finite somewhere.
double phi_inverse(const RateFunction& R, double u);

// integral over [b, +inf) of w(y)/R(y) where w has polynomial order y^s
// (s >= 0); pass w = nullptr for w(y) = max(y,1)^s. Convergence decided
// symbolically from the tail class of R, numeric value for the finite case,
// geometric-window extrapolation as fallback when the tail is unknown.
IntegralDecision integral_power_over_R(const RateFunction& R, double s, double b,
                                       const std::function<double(double)>& w = nullptr);

// integral over [b, +inf) of e^{theta*y}/R(y) dy.
IntegralDecision integral_exp_over_R(const RateFunction& R, double theta, double b);

} // namespace tclevy
