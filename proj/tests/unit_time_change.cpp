#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tclevy/common.hpp"
#include "tclevy/levy.hpp"
#include "tclevy/rate.hpp"
#include "tclevy/stats.hpp"
#include "tclevy/time_change.hpp"

using namespace tclevy;

namespace {

std::vector<double> grid_to(double hi, double step) {
    std::vector<double> g;
    for (double t = 0.0; t <= hi + 1e-12; t += step) g.push_back(t);
    return g;
}

} // namespace

TEST_CASE("constant rates reduce to a linear clock") {
    LevyModel bm = LevyModel::brownian(0.0, 1.0);
    Path lv = make_levy_path(bm, 1e-3, 2.0, 101);
    RateFunction one = RateFunction::parse("1");

    // probe strictly inside grid steps so the left-node lookup is unambiguous
    std::vector<double> probes;
    std::vector<std::size_t> nodes = {0, 100, 250, 999};
    for (std::size_t k : nodes) probes.push_back((static_cast<double>(k) + 0.5) * 1e-3);
    Path X = apply_time_change(lv, one, 1.5, probes);
    REQUIRE(X.values.size() == probes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        CHECK(X.values[i] == doctest::Approx(1.5 + lv.values[nodes[i]]).epsilon(1e-12));

    // R constant c: X_t = x0 + xi_{c t}
    RateFunction two = RateFunction::parse("2");
    std::vector<double> half;
    for (std::size_t k : nodes) half.push_back((static_cast<double>(k) + 0.5) * 5e-4);
    Path Y = apply_time_change(lv, two, 1.5, half);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        CHECK(Y.values[i] == doctest::Approx(1.5 + lv.values[nodes[i]]).epsilon(1e-12));
}

TEST_CASE("exponential rates give a deterministic transform clock") {
    // R(x) = e^{x}: the ratio R(w)/R(z+w) = e^{-z} is constant, so the
    // transform clock is exactly linear: output(t) = z + input(e^{z} t).
    LevyModel near_line = LevyModel::brownian(1.0, 1e-8);
    Path lv = make_levy_path(near_line, 1e-3, 3.0, 102);
    RateFunction ex = RateFunction::parse("exp(x)");
    std::vector<double> tg = grid_to(1.0, 1e-3);
    Path X = apply_time_change(lv, ex, 0.0, tg);

    double z = std::log(2.0);
    Path W = phi_transform(X, ex, z);
    REQUIRE(W.times.size() == X.times.size());
    for (std::size_t i = 0; i < W.times.size(); ++i) {
        if (std::isinf(W.values[i]) || std::isinf(X.values[i])) break;
        double t_fast = 2.0 * W.times[i];
        if (t_fast > tg.back()) break;
        // input value at the sped-up clock: the path is near-deterministic so
        // interpolation error is negligible against the tolerance
        std::size_t j = static_cast<std::size_t>(t_fast / 1e-3);
        j = std::min(j, X.values.size() - 1);
        if (std::isinf(X.values[j]) || X.values[j] > 2.5) break;
        CHECK(W.values[i] == doctest::Approx(z + X.values[j]).epsilon(0.02));
    }
}

TEST_CASE("transform at z zero is the identity") {
    LevyModel bm = LevyModel::brownian(0.5, 1.0);
    Path lv = make_levy_path(bm, 1e-3, 2.0, 103);
    RateFunction R = RateFunction::parse("exp(x/2)");
    Path X = apply_time_change(lv, R, 0.0, grid_to(1.5, 2e-3));
    Path W = phi_transform(X, R, 0.0);
    REQUIRE(W.times == X.times);
    // the very last alive node may fall on the transform's lifetime boundary
    std::size_t last_finite = 0;
    for (std::size_t i = 0; i < X.values.size(); ++i)
        if (!std::isinf(X.values[i])) last_finite = i;
    for (std::size_t i = 0; i < W.values.size(); ++i) {
        if (i == last_finite) continue;
        if (std::isinf(X.values[i])) {
            CHECK(std::isinf(W.values[i]));
        } else {
            CHECK(W.values[i] == doctest::Approx(X.values[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("round trip error scales with the base step") {
    LevyModel bm = LevyModel::brownian(0.0, 1.0);
    RateFunction R = RateFunction::parse("exp(x/2)");
    double err_fine = 0.0, err_coarse = 0.0;
    for (int i = 0; i < 20; ++i) {
        Path fine = make_levy_path(bm, 2e-3, 6.0, 104, streams::increments,
                                   static_cast<std::uint64_t>(i));
        Path coarse;
        coarse.dt_base = 4e-3;
        for (std::size_t j = 0; j < fine.times.size(); j += 2) {
            coarse.times.push_back(fine.times[j]);
            coarse.values.push_back(fine.values[j]);
        }
        for (const Path* base : {&fine, &coarse}) {
            double tau = base->dt_base;
            std::vector<double> tg = grid_to(3.0, tau);
            Path X = apply_time_change(*base, R, 1.0, tg);
            Path U = phi_transform(X, R, 1.0);
            Path V = phi_transform(U, R, -1.0);
            double err = 0.0;
            for (std::size_t j = 0; j < X.values.size(); ++j) {
                if (std::isinf(X.values[j]) || std::isinf(V.values[j])) continue;
                err = std::max(err, std::abs(V.values[j] - X.values[j]));
            }
            (base == &fine ? err_fine : err_coarse) += err;
        }
    }
    CHECK(err_fine > 0.0);
    // pointwise value comparison pays the path modulus of continuity over the
    // clock error, so it improves like sqrt(dt) at best
    double ratio = err_fine / err_coarse;
    CHECK(ratio > 0.3);
    CHECK(ratio < 0.9);
}

TEST_CASE("round trip clock deviation refines linearly") {
    LevyModel bm = LevyModel::brownian(0.0, 1.0);
    RateFunction R = RateFunction::parse("max(1,x)^2+1");
    double dev_fine = 0.0, dev_coarse = 0.0;
    for (int i = 0; i < 20; ++i) {
        Path fine = make_levy_path(bm, 2e-3, 6.0, 104, streams::increments,
                                   static_cast<std::uint64_t>(i));
        Path coarse;
        coarse.dt_base = 4e-3;
        for (std::size_t j = 0; j < fine.times.size(); j += 2) {
            coarse.times.push_back(fine.times[j]);
            coarse.values.push_back(fine.values[j]);
        }
        for (const Path* base : {&fine, &coarse}) {
            double tau = base->dt_base;
            Path X = apply_time_change(*base, R, 1.0, grid_to(3.0, tau));
            (base == &fine ? dev_fine : dev_coarse) +=
                round_trip_deviation(X, R, 1.0);
        }
    }
    CHECK(dev_fine > 0.0);
    double ratio = dev_fine / dev_coarse;
    CHECK(ratio > 0.35);
    CHECK(ratio < 0.65);
}

TEST_CASE("lifetime of the transformed path") {
    LevyModel bm = LevyModel::brownian(1.0, 1.0);
    RateFunction ex = RateFunction::parse("exp(x)");
    Path lv = make_levy_path(bm, 1e-3, 40.0, 105);
    Path X = apply_time_change(lv, ex, 2.0, grid_to(5.0, 1e-3));
    REQUIRE(X.status == Path::Status::Exploded);
    CHECK(X.zeta <= X.times.back());
    double zeta = X.zeta;

    CHECK(lifetime_of_transform(X, ex, 0.0) == doctest::Approx(zeta).epsilon(1e-6));

    // g(z, x) = e^{-z} constant: the lifetime halves at z = log 2 and
    // doubles at z = -log 2
    double half = lifetime_of_transform(X, ex, std::log(2.0));
    CHECK(half == doctest::Approx(zeta / 2.0).epsilon(1e-6));
    CHECK(lifetime_of_transform(X, ex, -std::log(2.0)) ==
          doctest::Approx(2.0 * zeta).epsilon(1e-6));
    // and matches the explosion time recorded on the transformed path
    Path W = phi_transform(X, ex, std::log(2.0));
    CHECK(W.status == Path::Status::Exploded);
    CHECK(std::abs(W.zeta - half) < 5e-3);

    // a path that never explodes is rejected
    Path censored = apply_time_change(make_levy_path(LevyModel::brownian(-1.0, 1.0),
                                                     1e-3, 5.0, 106),
                                      ex, 0.0, grid_to(400.0, 0.5));
    REQUIRE(censored.status != Path::Status::Exploded);
    CHECK_THROWS_AS((void)lifetime_of_transform(censored, ex, 0.5), NotExploded);
}

TEST_CASE("sentinel discipline after explosion") {
    LevyModel bm = LevyModel::brownian(1.0, 1.0);
    RateFunction ex = RateFunction::parse("exp(x)");
    Path lv = make_levy_path(bm, 1e-3, 40.0, 107);
    Path X = apply_time_change(lv, ex, 2.0, grid_to(5.0, 1e-3));
    REQUIRE(X.status == Path::Status::Exploded);
    bool seen_inf = false;
    for (double v : X.values) {
        if (std::isinf(v)) seen_inf = true;
        if (seen_inf) CHECK(std::isinf(v));
    }
    CHECK(seen_inf);
    CHECK(X.times.size() == X.values.size());
}

TEST_CASE("explosion frequencies split at the integral test") {
    LevyModel up = LevyModel::brownian(1.0, 1.0);
    RateFunction ex = RateFunction::parse("exp(x)");
    ExplosionProbe fast = explosion_probe(up, ex, 1.0, 200.0, 100, 108);
    CHECK(fast.explosion_freq >= 0.98);
    for (double z : fast.zeta_samples) CHECK(z > 0.0);

    LevyModel down = LevyModel::brownian(-1.0, 1.0);
    CHECK(explosion_probe(down, ex, 1.0, 200.0, 100, 109).explosion_freq == 0.0);

    RateFunction lin = RateFunction::parse("max(1,x)");
    CHECK(explosion_probe(up, lin, 1.0, 300.0, 100, 110).explosion_freq <= 0.02);
}

TEST_CASE("occupation weighted by the rate matches across a spatial shift") {
    // R(z+y) U(x+z, z+dy) = R(y) U(x, dy) on an exploding example; the strong
    // upward drift keeps the explosion time inside the output grid
    LevyModel bm = LevyModel::brownian(2.0, 1.0);
    RateFunction ex = RateFunction::parse("exp(x)");
    const double z = 1.0, lo = -2.0, hi = 6.0;
    const int bins = 40;
    const std::size_t n = 3000;
    std::vector<double> tg = grid_to(6.0, 2e-3);

    std::size_t exploded = 0;
    auto occupation = [&](double x0, double shift, std::uint64_t slot_base) {
        std::vector<double> h(bins, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            Path lv = make_levy_path(bm, 2e-3, 30.0, 111, streams::increments,
                                     slot_base + i);
            Path X = apply_time_change(lv, ex, x0, tg);
            if (X.status == Path::Status::Exploded) ++exploded;
            for (std::size_t j = 1; j < X.values.size(); ++j) {
                double v = X.values[j - 1];
                if (std::isinf(v)) break;
                double y = v - shift; // bin coordinate
                if (y < lo || y >= hi) continue;
                int b = static_cast<int>((y - lo) / (hi - lo) * bins);
                h[static_cast<std::size_t>(b)] +=
                    (X.times[j] - X.times[j - 1]) * ex(v);
            }
        }
        return h;
    };
    // lhs: paths from x + z, occupation of X - z weighted by R at the path
    // value; rhs: paths from x, occupation of X weighted the same way. The
    // shift transform maps one family onto the other.
    std::vector<double> lhs = occupation(z, z, 0);
    std::vector<double> rhs = occupation(0.0, 0.0, 1u << 20);
    CHECK(exploded >= 59 * n / 30); // nearly every path on both sides

    double sl = 0.0, sr = 0.0;
    for (int b = 0; b < bins; ++b) {
        sl += lhs[static_cast<std::size_t>(b)];
        sr += rhs[static_cast<std::size_t>(b)];
    }
    REQUIRE(sl > 0.0);
    REQUIRE(sr > 0.0);
    double tv = 0.0;
    for (int b = 0; b < bins; ++b)
        tv += std::abs(lhs[static_cast<std::size_t>(b)] / sl -
                       rhs[static_cast<std::size_t>(b)] / sr);
    CHECK(0.5 * tv < 0.05);
}

TEST_CASE("path construction is deterministic") {
    LevyModel m = LevyModel::brownian_cp(0.0, 1.0, 1.0, JumpLaw::exponential_up(1.0));
    Path a = make_levy_path(m, 1e-2, 5.0, 112, streams::increments, 9);
    Path b = make_levy_path(m, 1e-2, 5.0, 112, streams::increments, 9);
    CHECK(a.times == b.times);
    CHECK(a.values == b.values);
    CHECK(a.dt_base == 1e-2);
    CHECK(a.values.front() == 0.0);
}
