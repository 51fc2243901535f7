#include "tclevy/entrance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tclevy/classify.hpp"
#include "tclevy/common.hpp"
#include "tclevy/fluctuation.hpp"
#include "tclevy/rng.hpp"
#include "tclevy/stats.hpp"

namespace tclevy {

namespace {

double abs_jump_mean(const JumpLaw& j) {
    switch (j.kind) {
        case JumpLaw::Kind::ExponentialUp: return j.mean_up;
        case JumpLaw::Kind::ExponentialDown: return j.mean_down;
        case JumpLaw::Kind::TwoSidedExponential:
            return j.p_up * j.mean_up + (1.0 - j.p_up) * j.mean_down;
        case JumpLaw::Kind::PointMassMixture: {
            double s = 0.0;
            for (std::size_t i = 0; i < j.values.size(); ++i)
                s += j.weights[i] * std::abs(j.values[i]);
            return s;
        }
    }
    return 0.0;
}

double linear_speed(const LevyModel& model) {
    double v = std::abs(model.drift());
    if (model.cp_rate() > 0.0) v += model.cp_rate() * abs_jump_mean(model.jump());
    return v;
}

struct WalkSpec {
    std::vector<double> probes;       // sorted ascending changed-clock times
    double hit_level = -kInf;         // record first passage below this level
    double stop_below = -kInf;        // terminate once the position drops below
    double max_changed = kInf;        // changed-clock horizon
    std::size_t max_steps = 2000000;
    double delta = 1e-3;              // changed-clock increment target per step
    std::vector<double>* occ_bins = nullptr; // occupation mass over [occ_lo, occ_hi)
    double occ_lo = 0.0;
    double occ_hi = 0.0;
};

struct WalkResult {
    std::vector<double> probe_x; // value at each probe time; NaN when unreached
    std::size_t probes_filled = 0;
    bool crossed = false;
    double hit_time = 0.0;
    double a_end = 0.0;
    double x_end = 0.0;
    bool ran_out = false;
};

// One time-changed trajectory on an adaptive skeleton. Each step targets a
// fixed changed-clock increment (delta), additionally capped so the position
// moves by a small fraction of the local scale on which log R varies; that
// keeps the left-endpoint clock rule accurate when R changes quickly. The
// clock, probe values, and crossing times follow the same left-rule
// conventions as apply_time_change.
WalkResult walk_changed(const LevyModel& model, const RateFunction& R, double x0,
                        const WalkSpec& spec, Rng& rng) {
    WalkResult out;
    out.probe_x.assign(spec.probes.size(), std::numeric_limits<double>::quiet_NaN());
    const double sigma = std::sqrt(model.sigma2());
    const double vlin = linear_speed(model);
    const bool stable = model.family() == LevyModel::Family::SpectrallyPositiveStable;

    double occ_w = 1.0;
    std::size_t occ_n = 0;
    if (spec.occ_bins) {
        occ_n = spec.occ_bins->size();
        occ_w = (spec.occ_hi - spec.occ_lo) / static_cast<double>(occ_n);
    }

    double xi = 0.0;
    double a = 0.0;
    std::size_t k = 0;
    double cap_ref = kInf, cap_dx = 0.0;

    for (std::size_t step = 0; step < spec.max_steps; ++step) {
        double p = x0 + xi;
        if (!out.crossed && p < spec.hit_level) {
            out.crossed = true;
            out.hit_time = a;
        }
        bool probes_done = (k >= spec.probes.size());
        bool hit_done = (spec.hit_level == -kInf) || out.crossed;
        bool stop_done = (spec.stop_below == -kInf) || (p < spec.stop_below);
        if ((probes_done && hit_done && stop_done) || a >= spec.max_changed) {
            out.a_end = a;
            out.x_end = p;
            return out;
        }

        double r = R(p);
        double rinv = 1.0 / r;

        if (!(std::abs(p - cap_ref) <= 0.3 * cap_dx)) {
            double h = 0.01 * (1.0 + std::abs(p));
            double lr = std::abs(std::log(R(p + h)) - std::log(r)) / h;
            if (!std::isfinite(lr)) lr = 1e6;
            double dx = 0.5 * (1.0 + std::abs(p));
            if (lr > 1e-12) dx = std::min(dx, 0.2 / lr);
            if (spec.occ_bins && p > spec.occ_lo - 1.0 && p < spec.occ_hi + 1.0)
                dx = std::min(dx, 0.5 * occ_w);
            cap_ref = p;
            cap_dx = std::max(dx, 1e-9);
        }

        double ds = spec.delta * r;
        if (sigma > 0.0) {
            double u = (vlin > 0.0)
                           ? (std::sqrt(9.0 * sigma * sigma + 4.0 * vlin * cap_dx) -
                              3.0 * sigma) /
                                 (2.0 * vlin)
                           : cap_dx / (3.0 * sigma);
            ds = std::min(ds, u * u);
        } else if (vlin > 0.0) {
            ds = std::min(ds, cap_dx / vlin);
        }
        if (stable) {
            double al = model.alpha();
            ds = std::min(ds, std::pow(cap_dx / 3.0, al) /
                                  std::max(model.stable_scale(), 1e-12));
        }
        ds = std::clamp(ds, 1e-12, 1e9);

        double a_next = a + ds * rinv;
        while (k < spec.probes.size() && spec.probes[k] < a_next) {
            out.probe_x[k] = p;
            ++out.probes_filled;
            ++k;
        }
        if (spec.occ_bins && p >= spec.occ_lo && p < spec.occ_hi) {
            std::size_t bi = static_cast<std::size_t>((p - spec.occ_lo) / occ_w);
            if (bi < occ_n) (*spec.occ_bins)[bi] += ds * rinv;
        }
        a = a_next;
        xi += model.sample_increment(ds, rng);
    }
    out.ran_out = true;
    out.a_end = a;
    out.x_end = x0 + xi;
    return out;
}

} // namespace

StabilizationReport from_infinity_study(const LevyModel& model, const RateFunction& R,
                                        const std::vector<double>& x_levels,
                                        double t_probe, double b_level, std::size_t n,
                                        std::uint64_t seed) {
    if (x_levels.size() < 2)
        throw BadParam("from_infinity_study: need at least two start levels");
    for (std::size_t i = 0; i + 1 < x_levels.size(); ++i)
        if (!(x_levels[i] < x_levels[i + 1]))
            throw BadParam("from_infinity_study: x_levels must be strictly increasing");
    if (!(t_probe > 0)) throw BadParam("from_infinity_study: t_probe must be positive");
    if (!(b_level < x_levels.front()))
        throw BadParam("from_infinity_study: b_level must sit below every start level");
    if (n < 20) throw BadParam("from_infinity_study: need at least 20 paths per level");

    BoundaryReport cls = classify_boundary(model, R);
    if (cls.verdict != Verdict::Entrance)
        throw NotEntrance("from_infinity_study: classifier verdict is " +
                          verdict_name(cls.verdict) + ", not Entrance");

    StabilizationReport rep;
    for (std::size_t li = 0; li < x_levels.size(); ++li) {
        LevelStudy ls;
        ls.x0 = x_levels[li];
        std::size_t finite_n = 0, crossed_n = 0;
        for (std::size_t p = 0; p < n; ++p) {
            Rng rng(seed, streams::entrance,
                    (static_cast<std::uint64_t>(li + 1) << 40) + p);
            WalkSpec spec;
            spec.probes = {t_probe};
            spec.hit_level = b_level;
            spec.delta = t_probe / 256.0;
            spec.max_steps = 1500000;
            WalkResult w = walk_changed(model, R, ls.x0, spec, rng);
            if (w.probes_filled == 1) {
                ls.marginal.push_back(w.probe_x[0]);
                ++finite_n;
            }
            if (w.crossed) {
                ls.hit_time.push_back(w.hit_time);
                ++crossed_n;
            }
        }
        ls.finite_freq = static_cast<double>(finite_n) / static_cast<double>(n);
        ls.crossed_freq = static_cast<double>(crossed_n) / static_cast<double>(n);
        rep.levels.push_back(std::move(ls));
    }
    for (std::size_t i = 0; i + 1 < rep.levels.size(); ++i)
        rep.ks_consecutive.push_back(
            ks_two_sample(rep.levels[i].marginal, rep.levels[i + 1].marginal, seed)
                .statistic);
    rep.ks_shrinks = rep.ks_consecutive.size() >= 2 &&
                     rep.ks_consecutive.back() < rep.ks_consecutive.front();
    rep.proxy = rep.levels.back().marginal;
    rep.note = "proxy sample is the marginal at the largest start level";
    return rep;
}

MeanHittingReport mean_hitting(const LevyModel& model, const RateFunction& R, double x,
                               double b, std::size_t n, std::uint64_t seed) {
    if (!(x > b)) throw BadParam("mean_hitting: need x > b");
    if (n == 0) throw BadParam("mean_hitting: need at least one path");

    double delta = 1e-3;
    try {
        double ph = phi(R, b);
        if (std::isfinite(ph) && ph > 0) delta = std::min(1e-3, ph / 2000.0);
    } catch (const Error&) {
        // keep the default resolution when the tail is unresolved
    }

    std::vector<double> hits;
    std::size_t censored = 0;
    for (std::size_t p = 0; p < n; ++p) {
        Rng rng(seed, streams::entrance, 0x8000000000ull + p);
        WalkSpec spec;
        spec.hit_level = b;
        spec.delta = delta;
        spec.max_steps = 1000000;
        WalkResult w = walk_changed(model, R, x, spec, rng);
        if (w.crossed)
            hits.push_back(w.hit_time);
        else
            ++censored;
    }
    if (censored * 2 > n)
        throw CensoredMajority("mean_hitting: " + std::to_string(censored) + " of " +
                               std::to_string(n) + " paths never crossed b = " +
                               std::to_string(b) + " within the step budget");

    MeanHittingReport rep;
    rep.n_crossed = hits.size();
    rep.n_censored = censored;
    rep.estimate = mean_of(hits);
    rep.std_error = hits.size() >= 2 ? standard_error(hits) : 0.0;
    if (censored > 0)
        rep.note = "censored paths excluded from the mean; estimate biased low";
    return rep;
}

UndershootReport undershoot_stationarity(const LevyModel& model, const RateFunction& R,
                                         double x_proxy,
                                         const std::vector<double>& b_levels,
                                         std::size_t n, std::uint64_t seed) {
    if (b_levels.empty()) throw BadParam("undershoot_stationarity: no levels");
    for (double b : b_levels)
        if (!(b < x_proxy))
            throw BadParam("undershoot_stationarity: levels must sit below x_proxy");
    if (n < 20) throw BadParam("undershoot_stationarity: need at least 20 samples");

    (void)R; // crossing values are invariant under the clock change

    UndershootReport rep;
    rep.levels = b_levels;
    double mu = model.mean();
    double var = model.has_finite_variance() ? model.variance() : 1.0;
    for (std::size_t li = 0; li < b_levels.size(); ++li) {
        double b = b_levels[li];
        double z = x_proxy - b;
        double horizon = (std::isfinite(mu) && mu < 0)
                             ? 30.0 * z / (-mu) + 2000.0
                             : 50.0 * (z * z / std::max(var, 0.25) + z) + 5000.0;
        std::vector<double> us;
        std::size_t censored = 0;
        for (std::size_t p = 0; p < n; ++p) {
            Rng rng(seed, streams::first_passage,
                    (static_cast<std::uint64_t>(li + 1) << 40) + p);
            PassageSample ps = first_passage_below(model, x_proxy, b, horizon, 1e-3, rng);
            if (!ps.crossed) {
                ++censored;
                continue;
            }
            us.push_back(b - ps.post);
        }
        if (censored * 2 > n)
            throw CensoredMajority("undershoot_stationarity: majority censored at level " +
                                   std::to_string(b));
        rep.samples.push_back(std::move(us));
    }

    std::size_t L = rep.samples.size();
    rep.ks.assign(L, std::vector<double>(L, 0.0));
    bool ok = true;
    double crit_min = kInf;
    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = i + 1; j < L; ++j) {
            KsResult kr = ks_two_sample(rep.samples[i], rep.samples[j],
                                        seed + 31 * i + j);
            rep.ks[i][j] = rep.ks[j][i] = kr.statistic;
            rep.max_pairwise_ks = std::max(rep.max_pairwise_ks, kr.statistic);
            double crit = ks_critical(0.01, rep.samples[i].size(), rep.samples[j].size());
            crit_min = std::min(crit_min, crit);
            if (!(kr.statistic < crit)) ok = false;
        }
    }
    rep.critical_001 = L >= 2 ? crit_min : ks_critical(0.01, rep.samples[0].size(),
                                                       rep.samples[0].size());
    rep.level_independent = ok;

    OvershootMeasure om = stationary_overshoot(model, 20.0, n, seed + 777);
    std::vector<double> stationary =
        om.dirac_zero ? std::vector<double>(std::max<std::size_t>(rep.samples[0].size(), 20), 0.0)
                      : om.undershoot;
    KsResult kv = ks_two_sample(rep.samples.front(), stationary, seed + 999);
    rep.ks_vs_stationary = kv.statistic;
    rep.matches_stationary =
        kv.statistic < ks_critical(0.01, rep.samples.front().size(), stationary.size());
    rep.note = "undershoots sampled on the bare process; the clock change does not move "
               "crossing values";
    return rep;
}

SpeedReport speed_law(const LevyModel& model, const RateFunction& R, double x_proxy,
                      const std::vector<double>& t_window, std::size_t n,
                      std::uint64_t seed) {
    if (t_window.empty()) throw BadParam("speed_law: empty time window");
    std::vector<double> ts = t_window;
    std::sort(ts.begin(), ts.end());
    if (!(ts.front() > 0)) throw BadParam("speed_law: probe times must be positive");
    if (!(x_proxy > 0)) throw BadParam("speed_law: x_proxy must be positive");
    if (n < 20) throw BadParam("speed_law: need at least 20 paths");

    double mu = model.mean();
    double gamma = -mu;
    if (gamma == 0.0)
        throw ZeroDrift("speed_law: mean is zero; the small-time speed law needs a "
                        "strictly negative mean");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw BadParam("speed_law: gamma = -mean must be positive and finite");
    TailClass tp = R.tail_pos();
    if (!tp.known)
        throw UnknownTail("speed_law: rate tail toward +infinity unresolved");
    if (tp.q != 0.0 || !(tp.p > 1.0))
        throw Unsupported("speed_law: rate must be regularly varying with index > 1 "
                          "toward +infinity");

    SpeedReport rep;
    rep.gamma = gamma;
    rep.phi_proxy = phi(R, x_proxy);

    auto run = [&](double x0, std::vector<SpeedPoint>& out) {
        double ph0 = phi(R, x0);
        std::vector<std::vector<double>> raw(ts.size()), aligned(ts.size());
        for (std::size_t p = 0; p < n; ++p) {
            Rng rng(seed, streams::speed, p);
            WalkSpec spec;
            spec.probes = ts;
            spec.delta = ts.front() / 128.0;
            spec.max_changed = ts.back() * 1.05 + spec.delta;
            spec.max_steps = 3000000;
            WalkResult w = walk_changed(model, R, x0, spec, rng);
            for (std::size_t k = 0; k < ts.size(); ++k) {
                if (std::isnan(w.probe_x[k])) continue;
                double ph = phi(R, w.probe_x[k]);
                raw[k].push_back(ph / (gamma * ts[k]));
                aligned[k].push_back(ph / (gamma * ts[k] + ph0));
            }
        }
        for (std::size_t k = 0; k < ts.size(); ++k) {
            SpeedPoint sp;
            sp.t = ts[k];
            sp.n_used = raw[k].size();
            if (!raw[k].empty()) {
                sp.median_raw = median_of(raw[k]);
                sp.iqr_raw = quantile_of(raw[k], 0.75) - quantile_of(raw[k], 0.25);
                sp.median_aligned = median_of(aligned[k]);
                sp.iqr_aligned =
                    quantile_of(aligned[k], 0.75) - quantile_of(aligned[k], 0.25);
            }
            out.push_back(sp);
        }
    };
    run(x_proxy, rep.points);
    run(2.0 * x_proxy, rep.points_doubled);

    double worst = 0.0;
    for (std::size_t k = 0; k < rep.points.size(); ++k) {
        double m1 = rep.points[k].median_aligned;
        double m2 = rep.points_doubled[k].median_aligned;
        if (m1 != 0.0) worst = std::max(worst, std::abs(m2 - m1) / std::abs(m1));
    }
    rep.doubling_max_rel_change = worst;
    rep.note = "aligned ratio uses gamma t + phi(start) in the denominator; the raw "
               "ratio approaches 1 only once phi(start) is negligible against "
               "gamma times the smallest probe time";
    return rep;
}

OccupationFlatness occupation_flatness(const LevyModel& model, const RateFunction& R,
                                       double x_proxy, double b_stop, double lo,
                                       double hi, std::size_t n_bins, std::size_t n,
                                       std::uint64_t seed) {
    if (!(b_stop < lo && lo < hi && hi < x_proxy))
        throw BadParam("occupation_flatness: need b_stop < lo < hi < x_proxy");
    if (n_bins < 2 || n == 0)
        throw BadParam("occupation_flatness: need at least 2 bins and 1 path");

    std::vector<double> bins(n_bins, 0.0);
    double delta = 1e-3;
    try {
        double pl = phi(R, lo);
        if (std::isfinite(pl) && pl > 0) delta = pl / 500.0;
    } catch (const Error&) {
    }

    std::size_t ran_out = 0;
    for (std::size_t p = 0; p < n; ++p) {
        Rng rng(seed, streams::occupation, p);
        WalkSpec spec;
        spec.stop_below = b_stop;
        spec.delta = delta;
        spec.max_steps = 2000000;
        spec.occ_bins = &bins;
        spec.occ_lo = lo;
        spec.occ_hi = hi;
        WalkResult w = walk_changed(model, R, x_proxy, spec, rng);
        if (w.ran_out) ++ran_out;
    }
    if (ran_out * 10 > n)
        throw Inconclusive("occupation_flatness: too many paths exhausted the step "
                           "budget before reaching b_stop");

    OccupationFlatness rep;
    double w = (hi - lo) / static_cast<double>(n_bins);
    std::vector<double> vals(n_bins, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) {
        double mid = lo + (static_cast<double>(k) + 0.5) * w;
        rep.bin_mid.push_back(mid);
        vals[k] = bins[k] * R(mid);
        total += vals[k];
    }
    if (!(total > 0))
        throw Inconclusive("occupation_flatness: no occupation mass collected");
    double m = total / static_cast<double>(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        double v = vals[k] / m;
        rep.bin_value.push_back(v);
        rep.max_rel_dev = std::max(rep.max_rel_dev, std::abs(v - 1.0));
    }
    rep.note = "bin occupation mass times R(bin midpoint), normalized to mean 1";
    return rep;
}

} // namespace tclevy
