#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "tclevy/classify.hpp"
#include "tclevy/common.hpp"
#include "tclevy/levy.hpp"
#include "tclevy/rate.hpp"

using namespace tclevy;

TEST_CASE("oscillation hypothesis per family") {
    H1Record neg = check_H1(LevyModel::brownian(-1.0, 1.0));
    CHECK(neg.holds);
    CHECK(neg.branch == H1Record::Branch::NegativeMean);

    H1Record st = check_H1(LevyModel::stable(1.5));
    CHECK(st.holds);
    CHECK(st.branch == H1Record::Branch::FamilyFact);

    H1Record zm = check_H1(LevyModel::compound_poisson(
        0.0, 1.0, JumpLaw::two_sided(1.0, 1.0, 0.5)));
    CHECK(zm.holds);
    CHECK(zm.branch == H1Record::Branch::ZeroMeanIntegral);

    CHECK_FALSE(check_H1(LevyModel::brownian(1.0, 1.0)).holds);
    CHECK_FALSE(check_H1(LevyModel::stable(0.8)).holds);
    CHECK(check_H1(LevyModel::brownian(0.0, 1.0)).holds);
}

TEST_CASE("entrance integral finiteness") {
    LevyModel bm0 = LevyModel::brownian(0.0, 1.0);
    CHECK(entrance_test(bm0, RateFunction::parse("max(1,x)^3")).finite);
    CHECK_FALSE(entrance_test(bm0, RateFunction::parse("max(1,x)^2")).finite);
    CHECK(entrance_test(LevyModel::stable(1.5),
                        RateFunction::parse("max(1,x)^2")).finite);
    CHECK(entrance_test(LevyModel::brownian(-1.0, 1.0),
                        RateFunction::parse("exp(x/2)")).finite);
}

TEST_CASE("regular integral finiteness at a tilt") {
    LevyModel st = LevyModel::stable(1.5);
    RateFunction ex = RateFunction::parse("exp(x)");
    CHECK(regular_test(st, ex, 0.5).finite);
    CHECK_FALSE(regular_test(st, ex, 1.5).finite);
}

TEST_CASE("squared Bessel style dictionary") {
    RateFunction ex = RateFunction::parse("exp(x)");
    auto verdict_at = [&](double lam) {
        return classify_boundary(LevyModel::brownian(lam, 4.0), ex);
    };

    BoundaryReport ent = verdict_at(-1.0);
    CHECK(ent.verdict == Verdict::Entrance);
    CHECK(ent.h1.holds);
    CHECK(ent.entrance_integral.finite);
    CHECK_FALSE(ent.explosion_expected);

    CHECK(verdict_at(0.0).verdict == Verdict::Entrance);

    BoundaryReport rc = verdict_at(1.0);
    CHECK(rc.verdict == Verdict::RegularContinuous);
    CHECK(rc.theta_star == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(rc.explosion_expected);

    CHECK(verdict_at(2.5).verdict == Verdict::NoExtension);
}

TEST_CASE("tilt threshold against the rate growth") {
    // root at theta* = a/2 for brownian(a, 4); R = exp(x/alpha) admits
    // tilts below 1/alpha
    BoundaryReport keep = classify_boundary(LevyModel::brownian(2.4, 4.0),
                                            RateFunction::parse("exp(2*x)"));
    CHECK(keep.verdict == Verdict::RegularContinuous);
    CHECK(keep.theta_star == doctest::Approx(1.2).epsilon(1e-9));

    BoundaryReport lose = classify_boundary(LevyModel::brownian(1.2, 4.0),
                                            RateFunction::parse("exp(x/2)"));
    CHECK(lose.verdict == Verdict::NoExtension);
    CHECK(lose.h2.root.has_value());
}

TEST_CASE("jump in windows") {
    BoundaryReport st = classify_boundary(LevyModel::stable(1.5),
                                          RateFunction::parse("exp(2*x)"));
    CHECK(st.verdict == Verdict::RegularJumpIn);
    CHECK(st.theta_lo == 0.0);
    CHECK(st.theta_hi == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_FALSE(st.theta_hi_closed);

    LevyModel cp = LevyModel::compound_poisson(1.0, 1.0, JumpLaw::exponential_up(1.0));
    BoundaryReport open_end = classify_boundary(cp, RateFunction::parse("exp(x)"));
    CHECK(open_end.verdict == Verdict::RegularJumpIn);
    CHECK(open_end.theta_lo == 0.0);
    CHECK(open_end.theta_hi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(open_end.theta_hi_closed);

    // a polynomial factor on top of the exponential closes the right end
    BoundaryReport closed_end =
        classify_boundary(cp, RateFunction::parse("exp(x)*max(1,x)^2"));
    CHECK(closed_end.verdict == Verdict::RegularJumpIn);
    CHECK(closed_end.theta_hi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(closed_end.theta_hi_closed);
}

TEST_CASE("unknown rate tails stop the regular branch") {
    BoundaryReport rep = classify_boundary(LevyModel::stable(1.5),
                                           RateFunction::parse("2+log(max(2,x))"));
    CHECK(rep.verdict == Verdict::Indeterminate);
    CHECK_FALSE(rep.reason.empty());
}

TEST_CASE("explosion flags") {
    RateFunction ex = RateFunction::parse("exp(x)");
    CHECK(classify_boundary(LevyModel::brownian(1.0, 4.0), ex).explosion_expected);
    CHECK_FALSE(classify_boundary(LevyModel::brownian(1.0, 4.0),
                                  RateFunction::parse("1")).explosion_expected);
    // infinite mean family uses the power integral instead
    CHECK(classify_boundary(LevyModel::stable(0.8),
                            RateFunction::parse("max(1,x)^2")).explosion_expected);
}

TEST_CASE("verdicts satisfy their structural invariants") {
    std::vector<LevyModel> models = {
        LevyModel::brownian(1.0, 4.0),
        LevyModel::brownian(-1.0, 4.0),
        LevyModel::brownian(0.0, 1.0),
        LevyModel::compound_poisson(1.0, 1.0, JumpLaw::exponential_up(1.0)),
        LevyModel::compound_poisson(-1.0, 2.0, JumpLaw::exponential_up(1.0)),
        LevyModel::stable(0.8),
        LevyModel::stable(1.5),
        LevyModel::brownian_cp(1.0, 1.0, 1.0, JumpLaw::exponential_up(1.0)),
    };
    std::vector<std::string> rates = {"exp(x)",      "exp(x/2)",     "exp(2*x)",
                                      "max(1,x)^2",  "max(1,x)^3",   "1"};
    for (const LevyModel& m : models) {
        for (const std::string& rtxt : rates) {
            RateFunction R = RateFunction::parse(rtxt);
            BoundaryReport rep = classify_boundary(m, R);
            INFO(m.describe() << " with " << rtxt << " -> "
                              << verdict_name(rep.verdict));
            switch (rep.verdict) {
            case Verdict::Entrance:
                CHECK(rep.h1.holds);
                CHECK(rep.entrance_integral.finite);
                CHECK((rep.h2.feasible_empty || R.tail_pos().q <= 0.0));
                break;
            case Verdict::RegularContinuous:
                REQUIRE(rep.h2.root.has_value());
                CHECK(rep.theta_star == doctest::Approx(*rep.h2.root).epsilon(1e-9));
                CHECK(rep.theta_star > 0.0);
                REQUIRE_FALSE(rep.regular_integrals.empty());
                CHECK(rep.regular_integrals.front().second.finite);
                break;
            case Verdict::RegularJumpIn:
                CHECK(rep.theta_lo == 0.0);
                CHECK(rep.theta_hi > 0.0);
                CHECK_FALSE(rep.h2.root.has_value());
                CHECK_FALSE(rep.h2.feasible_empty);
                break;
            case Verdict::NoExtension:
            case Verdict::Indeterminate:
                break;
            }
            // a verdict string always renders and the report serializes
            nlohmann::json j = nlohmann::json::parse(rep.to_json());
            CHECK(j.at("verdict").get<std::string>() ==
                  std::string(verdict_name(rep.verdict)));
        }
    }
}
