#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "tclevy/common.hpp"
#include "tclevy/entrance.hpp"
#include "tclevy/levy.hpp"
#include "tclevy/rate.hpp"
#include "tclevy/stats.hpp"
#include "tclevy/time_change.hpp"

using namespace tclevy;

TEST_CASE("marginals stabilize as the start level grows") {
    LevyModel bm = LevyModel::brownian(-1.0, 4.0);
    RateFunction ex = RateFunction::parse("exp(x)");
    std::vector<double> levels = {3.0, 6.0, 20.0, 40.0};
    StabilizationReport rep = from_infinity_study(bm, ex, levels, 0.02, 1.0, 300, 301);

    REQUIRE(rep.levels.size() == 4);
    for (const LevelStudy& ls : rep.levels) {
        CHECK(ls.finite_freq == 1.0);
        CHECK(ls.marginal.size() == 300);
    }
    REQUIRE(rep.ks_consecutive.size() == 3);
    CHECK(rep.ks_shrinks);
    CHECK(rep.ks_consecutive.front() > rep.ks_consecutive.back());
    CHECK(rep.proxy == rep.levels.back().marginal);

    StabilizationReport again =
        from_infinity_study(bm, ex, levels, 0.02, 1.0, 300, 301);
    CHECK(again.proxy == rep.proxy);

    CHECK_THROWS_AS((void)from_infinity_study(LevyModel::brownian(1.0, 4.0), ex,
                                              levels, 0.02, 1.0, 50, 302),
                    NotEntrance);
}

TEST_CASE("mean hitting time stabilizes in the start level") {
    LevyModel bm = LevyModel::brownian(-1.0, 4.0);
    RateFunction ex = RateFunction::parse("exp(x)");
    MeanHittingReport a = mean_hitting(bm, ex, 10.0, 1.0, 300, 303);
    MeanHittingReport b = mean_hitting(bm, ex, 40.0, 1.0, 300, 304);
    CHECK(a.n_crossed + a.n_censored == 300);
    CHECK(a.n_crossed >= 295);
    CHECK(a.estimate > 0.0);
    CHECK(std::abs(a.estimate - b.estimate) <= 4.0 * (a.std_error + b.std_error));

    // hitting a higher level takes strictly less time
    MeanHittingReport hi = mean_hitting(bm, ex, 20.0, 2.0, 300, 305);
    MeanHittingReport lo = mean_hitting(bm, ex, 20.0, 1.0, 300, 305);
    CHECK(hi.estimate < lo.estimate);

    CHECK_THROWS_AS((void)mean_hitting(LevyModel::brownian(1.0, 1.0),
                                       RateFunction::parse("max(1,x)"), 5.0, 1.0,
                                       60, 306),
                    CensoredMajority);
}

TEST_CASE("undershoot law does not depend on the level or the rate") {
    LevyModel cp = LevyModel::compound_poisson(1.0, 1.0, JumpLaw::exponential_down(1.0));
    std::vector<double> levels = {4.0, 2.0, 0.0};
    UndershootReport rep = undershoot_stationarity(cp, RateFunction::parse("1"),
                                                   8.0, levels, 400, 307);
    REQUIRE(rep.samples.size() == 3);
    for (const auto& s : rep.samples) CHECK(s.size() >= 300);
    CHECK(rep.level_independent);
    CHECK(rep.max_pairwise_ks < rep.critical_001);
    CHECK(rep.matches_stationary);
    CHECK(rep.ks[0][1] == rep.ks[1][0]);

    // undershoots are clock-invariant, so the rate cannot matter
    UndershootReport other = undershoot_stationarity(
        cp, RateFunction::parse("max(1,x)^2+1"), 8.0, levels, 400, 307);
    CHECK(other.samples == rep.samples);

    // a creeping process crosses exactly at the level
    UndershootReport bm = undershoot_stationarity(
        LevyModel::brownian(-1.0, 1.0), RateFunction::parse("1"), 6.0,
        {2.0, 1.0}, 200, 308);
    for (const auto& s : bm.samples)
        for (double u : s) CHECK(u == 0.0);
    CHECK(bm.level_independent);
    CHECK(bm.matches_stationary);
}

TEST_CASE("descent speed follows the tail integral clock") {
    std::vector<double> window = {1e-3, 3e-3, 1e-2};

    // cubic tail: phi(x0) is negligible even from a moderate proxy, so the
    // raw ratio already sits at one across the window
    SpeedReport cubic = speed_law(LevyModel::brownian(-1.0, 1.0),
                                  RateFunction::parse("max(1,x)^3"), 300.0,
                                  window, 300, 309);
    CHECK(cubic.gamma == doctest::Approx(1.0));
    REQUIRE(cubic.points.size() == 3);
    for (const SpeedPoint& p : cubic.points) {
        CHECK(p.n_used >= 250);
        CHECK(p.median_raw > 0.9);
        CHECK(p.median_raw < 1.1);
    }

    // quadratic tail from a lower proxy: the aligned ratio absorbs the
    // start offset and doubling the proxy barely moves it
    SpeedReport quad = speed_law(LevyModel::brownian(-1.0, 1.0),
                                 RateFunction::parse("max(1,x)^2"), 1000.0,
                                 window, 300, 310);
    REQUIRE(quad.points.size() == 3);
    REQUIRE(quad.points_doubled.size() == 3);
    for (const SpeedPoint& p : quad.points) {
        CHECK(p.median_aligned > 0.88);
        CHECK(p.median_aligned < 1.12);
    }
    CHECK(quad.doubling_max_rel_change < 0.02);
    CHECK(quad.phi_proxy == doctest::Approx(1.0 / 1000.0).epsilon(1e-6));

    CHECK_THROWS_AS((void)speed_law(LevyModel::brownian(0.0, 1.0),
                                    RateFunction::parse("max(1,x)^2"), 100.0,
                                    window, 50, 311),
                    ZeroDrift);
    CHECK_THROWS_AS((void)speed_law(LevyModel::brownian(-1.0, 1.0),
                                    RateFunction::parse("exp(x)"), 100.0,
                                    window, 50, 312),
                    Unsupported);
    CHECK_THROWS_AS((void)speed_law(LevyModel::brownian(-1.0, 1.0),
                                    RateFunction::parse("max(1,x)"), 100.0,
                                    window, 50, 313),
                    Unsupported);
}

TEST_CASE("the proxy law is invariant under the shift transform") {
    LevyModel bm = LevyModel::brownian(-1.0, 4.0);
    RateFunction ex = RateFunction::parse("exp(x)");
    const double x_proxy = 12.0, z = 1.0, t_probe = 0.3;
    const std::size_t n = 700;
    std::vector<double> tg;
    for (double t = 0.0; t <= 1.0 + 1e-12; t += 2e-3) tg.push_back(t);
    const std::size_t probe_idx = 150; // t = 0.3 on the grid

    std::vector<double> transformed, fresh;
    for (std::size_t i = 0; i < n; ++i) {
        Path lv = make_levy_path(bm, 1e-3, 80.0, 314, streams::increments, i);
        Path X = apply_time_change(lv, ex, x_proxy, tg);
        Path W = phi_transform(X, ex, z);
        REQUIRE(W.times[probe_idx] == doctest::Approx(t_probe));
        if (!std::isinf(W.values[probe_idx]))
            transformed.push_back(W.values[probe_idx]);

        Path lv2 = make_levy_path(bm, 1e-3, 80.0, 314, streams::increments,
                                  100000 + i);
        Path Y = apply_time_change(lv2, ex, x_proxy, tg);
        if (!std::isinf(Y.values[probe_idx])) fresh.push_back(Y.values[probe_idx]);
    }
    CHECK(transformed.size() >= n - 10);
    CHECK(fresh.size() >= n - 10);
    KsResult ks = ks_two_sample(transformed, fresh, 315);
    CHECK(ks.p_value > 0.01);
}

TEST_CASE("occupation weighted by the rate is flat near the boundary") {
    // The window sits well above the stop level: the killed occupation
    // density picks up a 1 - exp(-2*mu*(y-b)/sigma^2) factor near b, so the
    // flat regime only starts a few multiples of sigma^2/(2*mu) above it.
    OccupationFlatness f = occupation_flatness(LevyModel::brownian(-2.0, 2.0),
                                               RateFunction::parse("exp(x)"), 12.0,
                                               2.0, 5.0, 9.0, 8, 2000, 316);
    REQUIRE(f.bin_value.size() == 8);
    REQUIRE(f.bin_mid.size() == 8);
    double avg = 0.0;
    for (double v : f.bin_value) avg += v;
    avg /= 8.0;
    CHECK(avg == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.max_rel_dev <= 0.10);
}
