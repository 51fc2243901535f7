#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "tclevy/common.hpp"
#include "tclevy/quad.hpp"
#include "tclevy/rate.hpp"

using namespace tclevy;

namespace {

// Brute-force convergence verdict for int_b^inf dx/R(x): geometric windows
// with a ratio test. Expressions in the library keep clear of borderline
// exponents so the test cannot sit on the fence.
bool quad_converges(const RateFunction& R, double b) {
    auto f = [&R](double y) { return 1.0 / R(y); };
    double lo = b;
    double hi = 32.0;
    while (hi <= lo) hi *= 2.0;
    std::vector<double> window;
    window.push_back(adaptive_quad(f, lo, hi));
    for (int k = 0; k < 8; ++k) {
        double next = hi * 2.0;
        window.push_back(adaptive_quad(f, hi, next));
        hi = next;
    }
    double early = window[window.size() - 5];
    double late = window.back();
    if (early <= 0.0) return true; // tail already vanished numerically
    return late / early < 0.5;
}

} // namespace

TEST_CASE("expression parsing and tail classes") {
    RateFunction r = RateFunction::parse("exp(x/2)");
    CHECK(r(0.0) == doctest::Approx(1.0));
    CHECK(r(2.0) == doctest::Approx(std::exp(1.0)));
    TailClass tp = r.tail_pos();
    CHECK(tp.known);
    CHECK(tp.q == doctest::Approx(0.5));
    // the -infinity side is the class of x -> R(-x): decaying, so bounded
    TailClass tn = r.tail_neg();
    CHECK(tn.known);
    CHECK(tn.q == doctest::Approx(-0.5));

    RateFunction one = RateFunction::parse("1");
    CHECK(one(-50.0) == 1.0);
    CHECK(one.tail_pos().known);
    CHECK(one.tail_pos().q == 0.0);
    CHECK(one.tail_pos().p == 0.0);

    RateFunction poly = RateFunction::parse("max(1,x)^2");
    CHECK(poly(-3.0) == 1.0);
    CHECK(poly(4.0) == 16.0);
    CHECK(poly.tail_pos().p == doctest::Approx(2.0));
    CHECK(poly.tail_pos().q == 0.0);
}

TEST_CASE("rates violating the standing conditions are rejected") {
    // 1/R -> 0 toward -infinity: unbounded rate on the left
    CHECK_THROWS_AS((void)RateFunction::parse("exp(-x)"), DomainError);
    // sign change
    CHECK_THROWS_AS((void)RateFunction::parse("x"), DomainError);
    // syntax
    CHECK_THROWS_AS((void)RateFunction::parse("exp("), ParseError);
    CHECK_THROWS_AS((void)RateFunction::parse("max(1,)"), ParseError);
    CHECK_THROWS_AS((void)RateFunction::parse(""), ParseError);
}

TEST_CASE("phi closed forms") {
    RateFunction sq = RateFunction::parse("max(1,x)^2");
    CHECK(phi(sq, 1.0) == doctest::Approx(1.0).epsilon(1e-8));
    // phi(b) = 1/b on b >= 1
    for (double b : {1.0, 2.0, 5.0, 40.0})
        CHECK(phi(sq, b) == doctest::Approx(1.0 / b).epsilon(1e-8));

    RateFunction ex = RateFunction::parse("exp(x)");
    CHECK(phi(ex, 0.0) == doctest::Approx(1.0).epsilon(1e-8));
    for (double b : {-2.0, 0.5, 3.0})
        CHECK(phi(ex, b) == doctest::Approx(std::exp(-b)).epsilon(1e-8));

    RateFunction lin = RateFunction::parse("max(1,x)");
    CHECK(std::isinf(phi(lin, 1.0)));

    // strictly decreasing where finite
    double prev = phi(sq, 1.0);
    for (double b = 1.5; b < 6.0; b += 0.5) {
        double cur = phi(sq, b);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("phi inverse round trips") {
    RateFunction sq = RateFunction::parse("max(1,x)^2");
    CHECK(phi_inverse(sq, 0.1) == doctest::Approx(10.0).epsilon(1e-8));

    RateFunction ex = RateFunction::parse("exp(x)");
    CHECK(phi_inverse(ex, std::exp(-3.0)) == doctest::Approx(3.0).epsilon(1e-8));

    for (double b : {1.0, 2.0, 7.5, 30.0}) {
        CHECK(phi_inverse(sq, phi(sq, b)) == doctest::Approx(b).epsilon(1e-8));
        CHECK(phi_inverse(ex, phi(ex, b)) == doctest::Approx(b).epsilon(1e-8));
    }
    for (double u : {0.9, 0.5, 0.01}) {
        CHECK(phi(sq, phi_inverse(sq, u)) == doctest::Approx(u).epsilon(1e-8));
        CHECK(phi(ex, phi_inverse(ex, u)) == doctest::Approx(u).epsilon(1e-8));
    }

    CHECK_THROWS_AS((void)phi_inverse(sq, 0.0), BadParam);
    RateFunction lin = RateFunction::parse("max(1,x)");
    CHECK_THROWS_AS((void)phi_inverse(lin, 0.5), BadParam);
}

TEST_CASE("symbolic convergence verdicts agree with brute-force quadrature") {
    struct Entry {
        const char* expr;
        bool finite;
    };
    // twenty mixed expressions, no borderline exponents
    std::vector<Entry> lib = {
        {"max(1,x)^2", true},
        {"max(1,x)^3", true},
        {"max(1,x)", false},
        {"max(1,x)^0.5", false},
        {"exp(x)", true},
        {"exp(x/2)", true},
        {"exp(2*x)", true},
        {"1", false},
        {"2", false},
        {"exp(x)+1", true},
        {"2*exp(x)", true},
        {"max(1,x)^2+max(1,x)", true},
        {"exp(x/3)", true},
        {"max(1,x)^2/2", true},
        {"exp(x)/3", true},
        {"max(1,x)*max(1,x)", true},
        {"pow(max(1,x),2.5)", true},
        {"max(1,x)^1.5", true},
        {"exp(x)*max(1,x)", true},
        {"1+max(1,x)", false},
    };
    for (const Entry& e : lib) {
        CAPTURE(e.expr);
        RateFunction R = RateFunction::parse(e.expr);
        double v = phi(R, 1.0);
        CHECK(std::isfinite(v) == e.finite);
        CHECK(quad_converges(R, 1.0) == e.finite);
    }
}

TEST_CASE("shift keeps values and adjusts nothing else") {
    RateFunction R = RateFunction::parse("max(1,x)^2+exp(x/2)");
    RateFunction S = R.shifted(1.5);
    for (double x : {-4.0, -1.0, 0.0, 2.0, 10.0})
        CHECK(S(x) == doctest::Approx(R(x + 1.5)).epsilon(1e-14));
    CHECK(S.tail_pos().known);
    CHECK(S.tail_pos().q == doctest::Approx(R.tail_pos().q));
}

TEST_CASE("weighted tail integrals") {
    // power weight: int y / y^3 converges, int y / y^2 does not
    RateFunction cubic = RateFunction::parse("max(1,x)^3");
    IntegralDecision d = integral_power_over_R(cubic, 1.0, 1.0);
    CHECK(d.verdict == IntegralVerdict::Finite);
    CHECK(d.value == doctest::Approx(1.0).epsilon(1e-6)); // int_1 y^{-2} dy

    RateFunction sq = RateFunction::parse("max(1,x)^2");
    CHECK(integral_power_over_R(sq, 1.0, 1.0).verdict == IntegralVerdict::Divergent);
    CHECK(integral_power_over_R(sq, 0.5, 1.0).verdict == IntegralVerdict::Finite);

    // exponential weight over an exponential rate
    RateFunction ex = RateFunction::parse("exp(x)");
    IntegralDecision fine = integral_exp_over_R(ex, 0.5, 0.0);
    CHECK(fine.verdict == IntegralVerdict::Finite);
    CHECK(fine.value == doctest::Approx(2.0).epsilon(1e-6)); // int_0 e^{-y/2} dy
    CHECK(integral_exp_over_R(ex, 1.5, 0.0).verdict == IntegralVerdict::Divergent);
}

TEST_CASE("unknown tail classes surface as errors downstream") {
    // log escapes the supported asymptotic class; parsing still succeeds
    RateFunction R = RateFunction::parse("2+log(max(2,x))");
    CHECK_FALSE(R.tail_pos().known);
    CHECK(R(100.0) > 0.0);
}
