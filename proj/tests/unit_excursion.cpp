#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tclevy/common.hpp"
#include "tclevy/excursion.hpp"
#include "tclevy/levy.hpp"
#include "tclevy/rate.hpp"
#include "tclevy/rng.hpp"
#include "tclevy/stats.hpp"

using namespace tclevy;

namespace {

const LevyModel kJumpCp =
    LevyModel::compound_poisson(1.0, 1.0, JumpLaw::exponential_up(1.0));
const LevyModel kBessel = LevyModel::brownian(1.0, 4.0);

} // namespace

TEST_CASE("jump in excursions enter by the exponential density") {
    RateFunction ex = RateFunction::parse("exp(x)");
    const double theta = 0.5, M = 0.0;
    std::vector<ExcursionSample> exc =
        sample_excursion_jump_in(kJumpCp, ex, theta, M, 400, 401);
    REQUIRE(exc.size() == 400);

    std::vector<double> entries;
    for (const ExcursionSample& e : exc) {
        CHECK(e.entry_mode == ExcursionSample::Entry::JumpIn);
        CHECK(e.x_entry <= M);
        CHECK(e.path.status == Path::Status::Exploded);
        CHECK(e.path.values.front() == e.x_entry);
        CHECK(std::isinf(e.path.values.back()));
        CHECK(e.path.times.back() == doctest::Approx(e.lifetime));
        CHECK(e.lifetime > 0.0);
        // the model is monotone increasing, so the entry is the minimum
        CHECK(e.min_level == e.x_entry);
        CHECK(e.weight == doctest::Approx(std::exp(theta * M) / theta));
        entries.push_back(e.x_entry);
    }

    // entry points against an exact draw from theta * e^{theta(x-M)}
    Rng rng(402, streams::scratch);
    std::vector<double> exact;
    for (int i = 0; i < 400; ++i) {
        double u = std::max(rng.uniform(), 1e-300);
        exact.push_back(M + std::log(u) / theta);
    }
    KsResult ks = ks_two_sample(entries, exact, 403);
    CHECK(ks.p_value > 0.01);

    // depth frequencies thin geometrically, ratio e^{-theta} per unit
    double p = std::exp(-theta);
    std::size_t prev = 0;
    for (double a : {-1.0, -2.0, -3.0}) {
        std::size_t cnt = 0;
        for (double v : entries)
            if (v < a) ++cnt;
        if (a > -1.5) {
            prev = cnt;
            continue;
        }
        double n_at = static_cast<double>(prev);
        REQUIRE(n_at >= 50);
        double se = std::sqrt(p * (1.0 - p) / n_at);
        CHECK(std::abs(static_cast<double>(cnt) / n_at - p) <= 3.0 * se);
        prev = cnt;
    }

    CHECK_THROWS_AS((void)sample_excursion_jump_in(kJumpCp, ex, 1.5, 0.0, 10, 404),
                    NotJumpIn);
    CHECK_THROWS_AS((void)sample_excursion_jump_in(kBessel, ex, 0.5, 0.0, 10, 405),
                    NotJumpIn);
}

TEST_CASE("continuous excursions enter from the boundary") {
    RateFunction ex = RateFunction::parse("exp(x)");
    std::vector<ExcursionSample> exc =
        sample_excursion_continuous(kBessel, ex, 0.5, 0.0, 16.0, 120, 406);
    // the sampler may drop a stray failed attempt instead of erroring as long
    // as the failure fraction stays tiny
    REQUIRE(exc.size() >= 116);
    REQUIRE(exc.size() <= 120);
    for (const ExcursionSample& e : exc) {
        CHECK(e.entry_mode == ExcursionSample::Entry::Continuous);
        CHECK(e.path.times.front() == 0.0);
        CHECK(std::isinf(e.path.values.front()));
        CHECK_FALSE(std::isinf(e.path.values[1]));
        CHECK(e.path.status == Path::Status::Exploded);
        CHECK(e.min_level <= 0.0);
        CHECK(e.lifetime > 0.0);
        CHECK(e.weight == doctest::Approx(1.0)); // e^{theta * 0}
    }

    std::vector<ExcursionSample> deep =
        sample_excursion_continuous(kBessel, ex, 0.5, 1.0, 16.0, 10, 407);
    for (const ExcursionSample& e : deep) {
        CHECK(e.min_level <= 1.0);
        CHECK(e.weight == doctest::Approx(std::exp(0.5)));
    }

    CHECK_THROWS_AS((void)sample_excursion_continuous(kBessel, ex, 0.3, 0.0, 16.0,
                                                      10, 408),
                    NotCramer);
    CHECK_THROWS_AS((void)sample_excursion_continuous(LevyModel::brownian(-1.0, 4.0),
                                                      ex, 0.5, 0.0, 16.0, 10, 409),
                    NotCramer);
}

TEST_CASE("occupation of excursions follows the tilted rate density") {
    RateFunction ex = RateFunction::parse("exp(x)");
    std::vector<ExcursionSample> exc =
        sample_excursion_jump_in(kJumpCp, ex, 0.5, 0.0, 500, 410);

    OccupationReport rep = occupation_check(exc, ex, 0.5, -2.0, 0.0, 6);
    REQUIRE(rep.observed.size() == 6);
    REQUIRE(rep.expected.size() == 6);
    double so = 0.0, se = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        so += rep.observed[i];
        se += rep.expected[i];
    }
    CHECK(so == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(se == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.min_bin_effective_n >= 30.0);
    CHECK(rep.chi_p > 0.01);
    CHECK(rep.pass);

    // scaling the rate by a constant cannot change the normalized target
    OccupationReport dbl = occupation_check(exc, RateFunction::parse("2*exp(x)"),
                                            0.5, -2.0, 0.0, 6);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(dbl.expected[i] == doctest::Approx(rep.expected[i]).epsilon(1e-9));
    CHECK(dbl.pass);

    // a range the excursions rarely reach has no statistical power
    CHECK_THROWS_AS((void)occupation_check(exc, ex, 0.5, -9.0, -7.0, 4),
                    InsufficientMass);
}

TEST_CASE("occupation of continuous excursions below the conditioning level") {
    // The occupation identity can only be tested on levels at or below the
    // conditioning level: above it the conditioned sample misses the shallow
    // excursions that still occupy those levels.
    RateFunction ex = RateFunction::parse("exp(x)");
    std::vector<ExcursionSample> exc =
        sample_excursion_continuous(kBessel, ex, 0.5, 0.0, 16.0, 400, 411);
    OccupationReport rep = occupation_check(exc, ex, 0.5, -3.0, 0.0, 6);
    CHECK(rep.min_bin_effective_n >= 30.0);
    CHECK(rep.pass);
}

TEST_CASE("shift and reclock consistency of the excursion family") {
    RateFunction ex = RateFunction::parse("exp(x)");
    std::vector<ExcursionSample> at0 =
        sample_excursion_continuous(kBessel, ex, 0.5, 0.0, 16.0, 250, 412);
    std::vector<ExcursionSample> at1 =
        sample_excursion_continuous(kBessel, ex, 0.5, 1.0, 16.0, 250, 413);

    ScalingReport self = excursion_scaling_check(at0, at0, ex, 0.5, 0.0);
    CHECK(self.mass_ratio == doctest::Approx(1.0));
    CHECK(self.mass_ratio_expected == doctest::Approx(1.0));
    CHECK(self.pass);

    ScalingReport rep = excursion_scaling_check(at0, at1, ex, 0.5, 1.0);
    CHECK(rep.z == 1.0);
    CHECK(rep.t_marginal > 0.0);
    CHECK(rep.mass_ratio == doctest::Approx(std::exp(0.5)).epsilon(1e-9));
    CHECK(rep.mass_ratio_expected == doctest::Approx(std::exp(0.5)).epsilon(1e-9));
    CHECK(rep.ks_lifetime_p > 0.01);
    CHECK(rep.ks_min_p > 0.01);
    CHECK(rep.ks_marginal_p > 0.01);
    CHECK(rep.pass);
}

TEST_CASE("gluing excursions into a recurrent extension") {
    RateFunction ex = RateFunction::parse("exp(x)");
    const double theta = 0.5, a_th = -5.0;
    GluedExtension g =
        glue_recurrent_extension(kBessel, ex, theta, a_th, 1e18, 120, 414);

    REQUIRE(g.excursion_min.size() == 120);
    REQUIRE(g.excursion_lifetime.size() == 120);
    REQUIRE(g.arrival_local_time.size() == 120);
    for (double m : g.excursion_min) CHECK(m < a_th);
    for (std::size_t i = 1; i < g.arrival_local_time.size(); ++i)
        CHECK(g.arrival_local_time[i] > g.arrival_local_time[i - 1]);

    CHECK(g.intensity == doctest::Approx(std::exp(theta * a_th)).epsilon(1e-12));
    // integral of e^{theta y - y} above the threshold
    CHECK(g.neglect_per_local ==
          doctest::Approx(std::exp((theta - 1.0) * a_th) / (1.0 - theta))
              .epsilon(1e-6));
    CHECK(g.local_time_span >= g.arrival_local_time.back());
    CHECK(std::abs(g.local_time_span * g.intensity - 120.0) <=
          4.0 * std::sqrt(120.0));
    CHECK(g.total_duration > 0.0);
    CHECK(g.neglect_fraction > 0.0);
    CHECK(g.neglect_fraction < 0.05);

    // the path is sentinel-separated and ids are parallel to nodes
    REQUIRE(g.excursion_id.size() == g.path.values.size());
    int max_id = 0;
    for (std::size_t j = 0; j < g.excursion_id.size(); ++j) {
        max_id = std::max(max_id, g.excursion_id[j]);
        bool block_end = (j + 1 == g.excursion_id.size()) ||
                         (g.excursion_id[j + 1] != g.excursion_id[j]);
        if (block_end) CHECK(std::isinf(g.path.values[j]));
    }
    CHECK(max_id == 120);

    // lifetimes and minima follow the conditioned excursion law
    std::vector<ExcursionSample> fresh =
        sample_excursion_continuous(kBessel, ex, theta, a_th, 16.0, 150, 415);
    std::vector<double> fl, fm;
    for (const ExcursionSample& e : fresh) {
        fl.push_back(e.lifetime);
        fm.push_back(e.min_level);
    }
    CHECK(ks_two_sample(g.excursion_lifetime, fl, 416).p_value > 0.01);
    CHECK(ks_two_sample(g.excursion_min, fm, 417).p_value > 0.01);

    // optional start segment is labeled id zero
    GluedExtension g0 = glue_recurrent_extension(kBessel, ex, theta, a_th, 1e18,
                                                 20, 418, 2.0);
    CHECK(g0.excursion_id.front() == 0);
    CHECK(g0.path.values.front() == doctest::Approx(2.0));

    CHECK_THROWS_AS((void)glue_recurrent_extension(kBessel,
                                                   RateFunction::parse("max(1,x)^2"),
                                                   theta, a_th, 1e18, 10, 419),
                    ThresholdTooHigh);
    CHECK_THROWS_AS((void)glue_recurrent_extension(kBessel, ex, 0.3, a_th, 1e18,
                                                   10, 420),
                    BadParam);
    CHECK_THROWS_AS((void)glue_recurrent_extension(kBessel, ex, -1.0, a_th, 1e18,
                                                   10, 421),
                    BadParam);
}

TEST_CASE("hitting probabilities scale by the tilt factor") {
    RateFunction ex = RateFunction::parse("exp(x)");
    CramerTable tab =
        cramer_limit_check(kBessel, ex, 0.5, 0.0, {2.0, 4.0}, 20000, 422);
    REQUIRE(tab.rows.size() == 2);
    CHECK(tab.have_constant);
    CHECK(tab.expected_constant == doctest::Approx(1.0));
    for (const CramerRow& r : tab.rows) {
        CHECK(r.n == 20000);
        CHECK(r.scaled ==
              doctest::Approx(r.p_hat * std::exp(0.5 * r.x)).epsilon(1e-12));
        CHECK(std::abs(r.scaled - 1.0) <= 3.0 * r.se_scaled);
    }

    CHECK_THROWS_AS((void)cramer_limit_check(kBessel, ex, 0.3, 0.0, {2.0}, 100, 423),
                    NotCramer);
    CHECK_THROWS_AS((void)cramer_limit_check(LevyModel::brownian(-1.0, 4.0), ex, 0.5,
                                             0.0, {2.0}, 100, 424),
                    NotCramer);
}
