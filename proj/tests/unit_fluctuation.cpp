#include "doctest.h"

#include <cmath>
#include <vector>

#include "tclevy/common.hpp"
#include "tclevy/fluctuation.hpp"
#include "tclevy/levy.hpp"
#include "tclevy/rng.hpp"
#include "tclevy/stats.hpp"

using namespace tclevy;

TEST_CASE("renewal evaluator dispatch and shapes") {
    RenewalFunction lin = renewal_plus(LevyModel::brownian(0.0, 2.0));
    CHECK(lin.kind() == RenewalKind::Linear);
    CHECK(lin.asymptote_exponent() == doctest::Approx(1.0));
    CHECK(lin(3.0) == doctest::Approx(3.0));

    RenewalFunction pw = renewal_plus(LevyModel::stable(1.5));
    CHECK(pw.kind() == RenewalKind::PowerLaw);
    CHECK(pw.asymptote_exponent() == doctest::Approx(0.5));
    CHECK(pw(4.0) == doctest::Approx(2.0));

    RenewalFunction pw2 = renewal_plus(LevyModel::stable(0.8));
    CHECK(pw2.asymptote_exponent() == doctest::Approx(0.8));

    // no positive jumps and zero mean: the upward ladder creeps, so the
    // renewal function is exactly linear
    RenewalFunction creep = renewal_plus(
        LevyModel::compound_poisson(1.0, 1.0, JumpLaw::exponential_down(1.0)));
    CHECK(creep.kind() == RenewalKind::Linear);

    // spectrally positive with negative mean goes through the dual scale function
    RenewalFunction sf = renewal_plus(
        LevyModel::compound_poisson(-2.0, 1.0, JumpLaw::exponential_up(1.0)));
    CHECK(sf.kind() == RenewalKind::ScaleFunction);

    // zero mean with two-sided jumps: Monte Carlo ladder table
    RenewalFunction mc = renewal_plus(
        LevyModel::compound_poisson(0.0, 1.0, JumpLaw::two_sided(1.0, 1.0, 0.5)), 3);
    CHECK(mc.kind() == RenewalKind::MonteCarlo);
    double r1 = mc(15.0) / 15.0;
    double r2 = mc(30.0) / 30.0;
    CHECK(std::abs(r2 - r1) < 0.3 * std::max(r1, r2)); // nu_+(y)/y stabilizes

    // every evaluator yields a non-negative non-decreasing function
    for (const RenewalFunction* f : {&lin, &pw, &pw2, &creep, &sf, &mc}) {
        double prev = (*f)(0.0);
        CHECK(prev >= 0.0);
        for (double y = 0.5; y <= 20.0; y += 0.5) {
            double cur = (*f)(y);
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("scale function inversion against closed forms") {
    // psi-hat(q) = q^2/2 inverts to W(x) = 2x
    LevyModel bm = LevyModel::brownian(0.0, 1.0);
    for (double x : {0.25, 0.5, 1.0, 2.0, 4.0})
        CHECK(scale_function_W(bm, x) == doctest::Approx(2.0 * x).epsilon(1e-6));
    CHECK(scale_function_W(bm, 1e-8) < 1e-4);

    // psi-hat(q) = q + q^2 inverts to 1 - e^{-x}
    LevyModel d2 = LevyModel::brownian(-1.0, 2.0);
    for (double x : {0.5, 1.0, 3.0})
        CHECK(scale_function_W(d2, x) ==
              doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-6));

    // psi-hat(q) = q + q^2/2 inverts to 1 - e^{-2x}
    LevyModel d1 = LevyModel::brownian(-1.0, 1.0);
    for (double x : {0.5, 1.0, 3.0})
        CHECK(scale_function_W(d1, x) ==
              doctest::Approx(1.0 - std::exp(-2.0 * x)).epsilon(1e-6));

    CHECK_THROWS_AS((void)scale_function_W(LevyModel::brownian(1.0, 1.0), 1.0),
                    BadParam);
    CHECK_THROWS_AS(
        (void)scale_function_W(
            LevyModel::compound_poisson(-2.0, 1.0, JumpLaw::exponential_down(1.0)),
            1.0),
        BadParam); // negative jumps: not spectrally positive
}

TEST_CASE("Cramer root and feasible set") {
    CramerInfo bm = cramer_theta(LevyModel::brownian(1.0, 4.0));
    REQUIRE(bm.root.has_value());
    CHECK(*bm.root == doctest::Approx(0.5).epsilon(1e-9));
    CHECK_FALSE(bm.feasible_empty);
    CHECK(bm.feasible_hi == doctest::Approx(0.5));
    CHECK(bm.feasible_hi_closed);

    // log mgf = theta (theta - 1) / (1 + theta): root exactly one
    CramerInfo cp = cramer_theta(
        LevyModel::compound_poisson(-1.0, 2.0, JumpLaw::exponential_up(1.0)));
    REQUIRE(cp.root.has_value());
    CHECK(*cp.root == doctest::Approx(1.0).epsilon(1e-8));

    CramerInfo st = cramer_theta(LevyModel::stable(1.5));
    CHECK_FALSE(st.root.has_value());
    CHECK_FALSE(st.feasible_empty);
    CHECK(std::isinf(st.feasible_hi));
    CHECK_FALSE(st.feasible_hi_closed);

    CHECK(cramer_theta(LevyModel::brownian(-1.0, 1.0)).feasible_empty);
    CHECK(cramer_theta(LevyModel::brownian(0.0, 1.0)).feasible_empty);
}

TEST_CASE("exponential change of measure") {
    LevyModel bm = LevyModel::brownian(1.0, 4.0);
    LevyModel tilted = esscher_tilt(bm, 0.5);
    CHECK(tilted.family() == LevyModel::Family::BrownianDrift);
    CHECK(tilted.drift() == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(tilted.sigma2() == doctest::Approx(4.0));
    CHECK(tilted.mean() < 0.0);

    // the tilted transform is the shifted original: mgf~(t) = mgf(t + root)
    for (double t : {0.1, 0.4, 0.9})
        CHECK(tilted.laplace_mgf(t) ==
              doctest::Approx(bm.laplace_mgf(t + 0.5)).epsilon(1e-10));

    LevyModel cp = LevyModel::compound_poisson(-1.0, 2.0, JumpLaw::exponential_up(1.0));
    LevyModel tcp = esscher_tilt(cp, 1.0);
    CHECK(tcp.mean() < 0.0);
    CHECK(tcp.drift() == doctest::Approx(-1.0));
    // exponential jumps tilt to exponential with mean 1/(1+theta)
    CHECK(tcp.jump().mean_up == doctest::Approx(0.5).epsilon(1e-9));
    for (double t : {0.2, 0.7, 1.5})
        CHECK(tcp.laplace_mgf(t) ==
              doctest::Approx(cp.laplace_mgf(t + 1.0)).epsilon(1e-9));

    CHECK_THROWS_AS((void)esscher_tilt(bm, 0.3), NotCramer);
    CHECK_THROWS_AS((void)esscher_tilt(LevyModel::brownian(-1.0, 1.0), 0.5), NotCramer);
}

TEST_CASE("first passage below a level") {
    // drifting Brownian motion creeps and E[T] = depth / |drift|
    LevyModel bm = LevyModel::brownian(-1.0, 1.0);
    std::vector<double> times;
    for (int i = 0; i < 400; ++i) {
        Rng rng(21, streams::first_passage, static_cast<std::uint64_t>(i));
        PassageSample ps = first_passage_below(bm, 0.0, -1.0, 200.0, 1e-3, rng);
        REQUIRE(ps.crossed);
        CHECK(ps.post == doctest::Approx(-1.0));
        times.push_back(ps.time);
    }
    double se = standard_error(times);
    CHECK(std::abs(mean_of(times) - 1.0) < 4.0 * se);

    // upward drift with a short horizon leaves most paths uncrossed
    LevyModel up = LevyModel::brownian(1.0, 1.0);
    int crossed = 0;
    for (int i = 0; i < 50; ++i) {
        Rng rng(22, streams::first_passage, static_cast<std::uint64_t>(i));
        crossed += first_passage_below(up, 0.0, -5.0, 5.0, 1e-3, rng).crossed ? 1 : 0;
    }
    CHECK(crossed < 10);
}

TEST_CASE("exponential undershoot from memorylessness") {
    // positive drift between jumps: every crossing happens by a jump, and the
    // exponential jump law makes the undershoot Exponential(1) exactly
    LevyModel cp = LevyModel::compound_poisson(1.0, 1.0, JumpLaw::exponential_down(1.0));
    std::vector<double> under;
    for (int i = 0; i < 400; ++i) {
        Rng rng(23, streams::first_passage, static_cast<std::uint64_t>(i));
        PassageSample ps = first_passage_below(cp, 0.0, -0.5, 4000.0, 1e-2, rng);
        if (!ps.crossed) continue;
        under.push_back(-0.5 - ps.post);
        CHECK(under.back() > 0.0);
    }
    REQUIRE(under.size() > 350);
    std::vector<double> exact;
    Rng rng(24, streams::scratch);
    for (std::size_t i = 0; i < under.size(); ++i) exact.push_back(rng.exponential());
    KsResult ks = ks_two_sample(under, exact, 25);
    CHECK(ks.statistic < ks_critical(0.01, under.size(), exact.size()));
}

TEST_CASE("stationary overshoot measure") {
    OvershootMeasure st = stationary_overshoot(LevyModel::stable(1.5), 30.0, 50, 26);
    CHECK(st.dirac_zero);

    OvershootMeasure bm = stationary_overshoot(LevyModel::brownian(-1.0, 1.0), 30.0, 50, 27);
    CHECK(bm.dirac_zero);

    OvershootMeasure cp = stationary_overshoot(
        LevyModel::compound_poisson(1.0, 1.0, JumpLaw::exponential_down(1.0)), 30.0,
        400, 28);
    CHECK_FALSE(cp.dirac_zero);
    REQUIRE(cp.undershoot.size() >= 200);
    CHECK(cp.mean_ladder_down > 0.0);
    std::vector<double> exact;
    Rng rng(29, streams::scratch);
    for (std::size_t i = 0; i < cp.undershoot.size(); ++i)
        exact.push_back(rng.exponential());
    KsResult ks = ks_two_sample(cp.undershoot, exact, 30);
    CHECK(ks.statistic < ks_critical(0.01, cp.undershoot.size(), exact.size()));
}

TEST_CASE("empirical ladder table grows linearly for zero-mean Brownian motion") {
    auto [gx, gv] = renewal_mc_table(LevyModel::brownian(0.0, 1.0), 10.0, 800, 31, 2e-3);
    REQUIRE(gx.size() == gv.size());
    REQUIRE(gx.size() > 10);
    std::size_t half = gx.size() / 2, last = gx.size() - 1;
    double r1 = gv[half] / gx[half];
    double r2 = gv[last] / gx[last];
    CHECK(std::abs(r2 - r1) < 0.25 * std::max(r1, r2));
}
