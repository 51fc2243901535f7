#include "tclevy/excursion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "tclevy/classify.hpp"
#include "tclevy/common.hpp"
#include "tclevy/fluctuation.hpp"
#include "tclevy/quad.hpp"
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

struct RecSpec {
    double hit_level = -kInf;  // stop at the first passage below this level
    bool to_explosion = false; // run until the remaining clock is negligible
    double delta = 1e-3;       // changed-clock increment target per step
    double dx_rec = 0.05;      // record a node after this much position travel
    double tight_below = kInf; // fine position resolution below this level
    std::size_t max_steps = 2000000;
};

struct RecWalk {
    std::vector<double> times, values; // recorded skeleton, changed clock
    double min_level = kInf;           // running minimum including bridge mins
    bool crossed = false;
    double hit_time = 0.0;
    double hit_value = 0.0;
    bool exploded = false;
    double zeta = 0.0;
    double a_end = 0.0;
    double x_end = 0.0;
    bool ran_out = false;
};

// Recording walker on the changed clock. Step sizing follows the adaptive
// rule of the entrance module (clock target capped by the scale on which
// log R varies); below tight_below the position moves are additionally
// capped near the recording stride so the skeleton resolves the analysis
// window, above it a looser one-sigma rule keeps long climbs cheap. The
// per-step minimum uses the Brownian bridge between endpoints, which also
// drives crossing detection in hit_level mode. Explosion is declared once
// the remaining clock phi(R, p) / mean is below 0.1 percent of the elapsed
// time; the estimated remainder becomes the lifetime tail.
RecWalk walk_record(const LevyModel& model, const RateFunction& R, double x0,
                    const RecSpec& spec, Rng& rng) {
    RecWalk out;
    const double sigma = std::sqrt(model.sigma2());
    const double vlin = linear_speed(model);
    const bool stable = model.family() == LevyModel::Family::SpectrallyPositiveStable;
    double mu = model.mean();
    double mu_eff = (std::isfinite(mu) && mu > 0.0) ? mu : 1.0;

    double xi = 0.0, a = 0.0;
    double cap_ref = kInf, cap_dx = 0.0;
    bool cap_tight = true;
    double rec_x = x0;
    double next_expl_check = x0 + 1.0;

    out.times.push_back(0.0);
    out.values.push_back(x0);
    out.min_level = x0;

    for (std::size_t step = 0; step < spec.max_steps; ++step) {
        double p = x0 + xi;

        if (spec.to_explosion && p >= next_expl_check) {
            double rem = phi(R, p) / mu_eff;
            if (rem < 1e-3 * std::max(a, 1e-9)) {
                out.exploded = true;
                out.zeta = a + std::max(rem, 1e-12 * std::max(a, 1.0));
                out.a_end = a;
                out.x_end = p;
                if (out.times.back() != a || out.values.back() != p) {
                    out.times.push_back(a);
                    out.values.push_back(p);
                }
                return out;
            }
            next_expl_check = p + 1.0;
        }

        double r = R(p);
        bool tight = (p < spec.tight_below);
        if (!(std::abs(p - cap_ref) <= 0.3 * cap_dx) || tight != cap_tight) {
            double h = 0.01 * (1.0 + std::abs(p));
            double lr = std::abs(std::log(R(p + h)) - std::log(r)) / h;
            if (!std::isfinite(lr)) lr = 1e6;
            double dx = 0.5 * (1.0 + std::abs(p));
            if (lr > 1e-12) dx = std::min(dx, 0.2 / lr);
            if (tight) dx = std::min(dx, 2.0 * spec.dx_rec);
            cap_ref = p;
            cap_dx = std::max(dx, 1e-9);
            cap_tight = tight;
        }

        // the clock target is relative once the clock has grown: a fixed
        // increment would need e^{depth} steps to climb out of a deep dip,
        // and 0.1 percent resolution matches the explosion cutoff below
        double ds = std::max(spec.delta, 1e-3 * a) * r;
        double sfac = tight ? 3.0 : 1.0;
        if (sigma > 0.0) {
            double u = (vlin > 0.0)
                           ? (std::sqrt(sfac * sfac * sigma * sigma +
                                        4.0 * vlin * cap_dx) -
                              sfac * sigma) /
                                 (2.0 * vlin)
                           : cap_dx / (sfac * sigma);
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

        double a_next = a + ds / r;
        double dxi = model.sample_increment(ds, rng);
        double p_next = p + dxi;

        double seg_min = std::min(p, p_next);
        if (sigma > 0.0) {
            double u = std::max(rng.uniform(), 1e-300);
            double d2 = (p - p_next) * (p - p_next) -
                        2.0 * sigma * sigma * ds * std::log(u);
            seg_min = 0.5 * (p + p_next - std::sqrt(std::max(d2, 0.0)));
        }
        if (seg_min < out.min_level) out.min_level = seg_min;

        if (spec.hit_level != -kInf && seg_min < spec.hit_level) {
            double cross_v, cross_t;
            if (sigma > 0.0) {
                bool jumpy = model.cp_rate() > 0.0 &&
                             std::abs(dxi - model.drift() * ds) >
                                 6.0 * sigma * std::sqrt(ds);
                if (p_next < spec.hit_level && jumpy) {
                    cross_v = p_next; // crossed inside a jump
                    cross_t = a_next;
                } else {
                    cross_v = spec.hit_level; // diffusive crossing creeps
                    cross_t = a + 0.5 * ds / r;
                }
            } else {
                bool drift_cross = p + model.drift() * ds <= spec.hit_level;
                cross_v = drift_cross ? spec.hit_level : p_next;
                cross_t = drift_cross ? a + 0.5 * ds / r : a_next;
            }
            out.crossed = true;
            out.hit_time = cross_t;
            out.hit_value = cross_v;
            out.a_end = cross_t;
            out.x_end = cross_v;
            if (cross_v < out.min_level) out.min_level = cross_v;
            out.times.push_back(cross_t);
            out.values.push_back(cross_v);
            return out;
        }

        a = a_next;
        xi += dxi;
        if (std::abs(p_next - rec_x) >= spec.dx_rec) {
            out.times.push_back(a);
            out.values.push_back(p_next);
            rec_x = p_next;
        }
    }
    out.ran_out = true;
    out.a_end = a;
    out.x_end = x0 + xi;
    if (out.times.back() != a) {
        out.times.push_back(a);
        out.values.push_back(x0 + xi);
    }
    return out;
}

// One jump-in excursion: entry drawn from the exponential window density,
// then the time-changed path runs to explosion. nullopt when the walk ran
// out of steps before exploding.
std::optional<ExcursionSample> jump_in_one(const LevyModel& model,
                                           const RateFunction& R, double theta,
                                           double M, std::uint64_t seed,
                                           std::uint64_t slot) {
    Rng er(seed, streams::excursion_entry, slot);
    double u = std::max(er.uniform(), 1e-300);
    double x_entry = M + std::log(u) / theta;

    Rng pr(seed, streams::excursion_path, slot);
    RecSpec spec;
    spec.to_explosion = true;
    spec.tight_below = M + 1.0;
    double t_scale = phi(R, std::min(x_entry, M));
    double mu = model.mean();
    if (std::isfinite(mu) && mu > 0.0) t_scale /= mu;
    spec.delta = std::isfinite(t_scale) ? std::max(t_scale, 1e-6) / 512.0 : 1e-3;
    RecWalk w = walk_record(model, R, x_entry, spec, pr);
    if (!w.exploded) return std::nullopt;

    ExcursionSample s;
    s.entry_mode = ExcursionSample::Entry::JumpIn;
    s.x_entry = x_entry;
    s.path.times = std::move(w.times);
    s.path.values = std::move(w.values);
    s.path.times.push_back(w.zeta);
    s.path.values.push_back(kInf);
    s.path.status = Path::Status::Exploded;
    s.path.zeta = w.zeta;
    s.path.dt_base = spec.delta;
    s.lifetime = w.zeta;
    s.min_level = w.min_level;
    s.weight = std::exp(theta * M) / theta;
    return s;
}

struct ContinuousFail {
    std::size_t phase1 = 0;
    std::size_t phase2 = 0;
};

// One continuous excursion: tilted descent from the proxy to the first
// crossing of y, then the original model from the crossing value to
// explosion. The assembled path starts at an infinity sentinel.
std::optional<ExcursionSample> continuous_one(const LevyModel& model,
                                              const LevyModel& tilted,
                                              const RateFunction& R,
                                              double theta_star, double y,
                                              double x_proxy, std::uint64_t seed,
                                              std::uint64_t slot,
                                              ContinuousFail& fail) {
    double mu_t = tilted.mean();
    Rng r1(seed, streams::excursion_path, (1ull << 40) + slot);
    RecSpec s1;
    s1.hit_level = y;
    s1.tight_below = y + 1.0;
    double span = std::max(phi(R, y) - phi(R, x_proxy), 1e-9);
    s1.delta = std::isfinite(span)
                   ? std::max(span / std::max(-mu_t, 1e-6), 1e-6) / 512.0
                   : 1e-3;
    RecWalk w1 = walk_record(tilted, R, x_proxy, s1, r1);
    if (!w1.crossed) {
        ++fail.phase1;
        return std::nullopt;
    }

    Rng r2(seed, streams::excursion_path, (2ull << 40) + slot);
    RecSpec s2;
    s2.to_explosion = true;
    s2.tight_below = y + 1.0;
    double t2 = phi(R, w1.hit_value);
    double mu = model.mean();
    if (std::isfinite(mu) && mu > 0.0) t2 /= mu;
    s2.delta = std::isfinite(t2) ? std::max(t2, 1e-6) / 512.0 : 1e-3;
    RecWalk w2 = walk_record(model, R, w1.hit_value, s2, r2);
    if (!w2.exploded) {
        ++fail.phase2;
        return std::nullopt;
    }

    double T1 = w1.hit_time;
    ExcursionSample s;
    s.entry_mode = ExcursionSample::Entry::Continuous;
    s.x_entry = kInf;
    s.path.times.push_back(0.0);
    s.path.values.push_back(kInf);
    for (std::size_t i = 0; i < w1.times.size(); ++i) {
        if (!(w1.times[i] > 0.0)) continue;
        s.path.times.push_back(w1.times[i]);
        s.path.values.push_back(w1.values[i]);
    }
    for (std::size_t i = 0; i < w2.times.size(); ++i) {
        if (!(w2.times[i] > 0.0)) continue;
        s.path.times.push_back(T1 + w2.times[i]);
        s.path.values.push_back(w2.values[i]);
    }
    double zeta = T1 + w2.zeta;
    s.path.times.push_back(zeta);
    s.path.values.push_back(kInf);
    s.path.status = Path::Status::Exploded;
    s.path.zeta = zeta;
    s.path.dt_base = s2.delta;
    s.lifetime = zeta;
    s.min_level = std::min(w1.min_level, w2.min_level);
    s.weight = std::exp(theta_star * y);
    return s;
}

double value_at(const Path& p, double t) {
    auto it = std::upper_bound(p.times.begin(), p.times.end(), t);
    if (it == p.times.begin()) return p.values.front();
    std::size_t j = static_cast<std::size_t>(it - p.times.begin()) - 1;
    return p.values[j];
}

// Solve S x = b for a symmetric positive definite S via Cholesky.
std::vector<double> solve_spd(std::vector<double> S, std::vector<double> b) {
    std::size_t n = b.size();
    for (std::size_t j = 0; j < n; ++j) {
        double d = S[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= S[j * n + k] * S[j * n + k];
        if (!(d > 0.0))
            throw Inconclusive("occupation_check: singular covariance, bins too sparse");
        d = std::sqrt(d);
        S[j * n + j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = S[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= S[i * n + k] * S[j * n + k];
            S[i * n + j] = v / d;
        }
    }
    for (std::size_t i = 0; i < n; ++i) { // forward
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= S[i * n + k] * b[k];
        b[i] = v / S[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) { // backward
        double v = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) v -= S[k * n + ii] * b[k];
        b[ii] = v / S[ii * n + ii];
    }
    return b;
}

} // namespace

std::vector<ExcursionSample> sample_excursion_jump_in(const LevyModel& model,
                                                      const RateFunction& R,
                                                      double theta, double M,
                                                      std::size_t n,
                                                      std::uint64_t seed) {
    if (!(theta > 0.0)) throw BadParam("sample_excursion_jump_in: theta must be positive");
    if (!std::isfinite(M)) throw BadParam("sample_excursion_jump_in: window level must be finite");
    if (n == 0) throw BadParam("sample_excursion_jump_in: need at least one excursion");

    BoundaryReport cls = classify_boundary(model, R);
    if (cls.verdict != Verdict::RegularJumpIn)
        throw NotJumpIn("sample_excursion_jump_in: classifier verdict is " +
                        verdict_name(cls.verdict) + ", not RegularJumpIn");
    bool inside = theta > cls.theta_lo &&
                  (theta < cls.theta_hi ||
                   (cls.theta_hi_closed && theta == cls.theta_hi));
    if (!inside)
        throw NotJumpIn("sample_excursion_jump_in: theta outside the jump-in interval");

    std::vector<ExcursionSample> out;
    out.reserve(n);
    std::size_t failed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto s = jump_in_one(model, R, theta, M, seed, i);
        if (s)
            out.push_back(std::move(*s));
        else
            ++failed;
    }
    if (failed * 50 > n)
        throw Inconclusive("sample_excursion_jump_in: " + std::to_string(failed) +
                           " of " + std::to_string(n) +
                           " paths fell short of explosion within the step budget");
    return out;
}

std::vector<ExcursionSample> sample_excursion_continuous(const LevyModel& model,
                                                         const RateFunction& R,
                                                         double theta_star, double y,
                                                         double x_proxy, std::size_t n,
                                                         std::uint64_t seed) {
    if (!(theta_star > 0.0))
        throw BadParam("sample_excursion_continuous: theta_star must be positive");
    if (!(x_proxy > y))
        throw BadParam("sample_excursion_continuous: the proxy must start above y");
    if (n == 0) throw BadParam("sample_excursion_continuous: need at least one excursion");

    CramerInfo ci = cramer_theta(model);
    if (!ci.root)
        throw NotCramer("sample_excursion_continuous: the model has no positive root");
    if (std::abs(*ci.root - theta_star) >
        1e-6 * std::max(1.0, std::abs(theta_star)))
        throw NotCramer("sample_excursion_continuous: theta_star does not match the root " +
                        std::to_string(*ci.root));
    LevyModel tilted = esscher_tilt(model, theta_star);
    if (!(tilted.mean() < 0.0))
        throw NotCramer("sample_excursion_continuous: the tilted model does not drift down");

    std::vector<ExcursionSample> out;
    out.reserve(n);
    ContinuousFail fail;
    for (std::size_t i = 0; i < n; ++i) {
        auto s = continuous_one(model, tilted, R, theta_star, y, x_proxy, seed, i, fail);
        if (s) out.push_back(std::move(*s));
    }
    if (fail.phase2 * 50 > n)
        throw NoExplosionPhase2("sample_excursion_continuous: " +
                                std::to_string(fail.phase2) + " of " + std::to_string(n) +
                                " paths fell short of explosion after the crossing");
    if (fail.phase1 * 50 > n)
        throw Inconclusive("sample_excursion_continuous: " + std::to_string(fail.phase1) +
                           " of " + std::to_string(n) +
                           " tilted descents missed the crossing within the step budget");
    return out;
}

OccupationReport occupation_check(const std::vector<ExcursionSample>& excursions,
                                  const RateFunction& R, double theta, double a,
                                  double M, std::size_t n_bins) {
    if (!(a < M)) throw BadParam("occupation_check: need a < M");
    if (n_bins < 2) throw BadParam("occupation_check: need at least 2 bins");
    std::size_t N = excursions.size();
    std::size_t K = n_bins;
    if (N < 2 * K)
        throw InsufficientMass("occupation_check: need at least " +
                               std::to_string(2 * K) + " excursions for " +
                               std::to_string(K) + " bins");

    double w = (M - a) / static_cast<double>(K);

    // per-excursion weighted time in each bin
    std::vector<std::vector<double>> mass(N, std::vector<double>(K, 0.0));
    std::vector<double> tot(N, 0.0);
    for (std::size_t e = 0; e < N; ++e) {
        const Path& p = excursions[e].path;
        double we = excursions[e].weight;
        for (std::size_t i = 0; i + 1 < p.times.size(); ++i) {
            double v0 = p.values[i];
            if (!std::isfinite(v0)) continue;
            double v1 = p.values[i + 1];
            double dt = p.times[i + 1] - p.times[i];
            if (!(dt > 0.0)) continue;
            double v = (std::isfinite(v1) && std::abs(v1 - v0) < 0.5)
                           ? 0.5 * (v0 + v1)
                           : v0;
            if (v < a || v >= M) continue;
            std::size_t bi = static_cast<std::size_t>((v - a) / w);
            if (bi >= K) bi = K - 1;
            mass[e][bi] += we * dt;
        }
        tot[e] = std::accumulate(mass[e].begin(), mass[e].end(), 0.0);
    }

    OccupationReport rep;
    rep.bin_lo.resize(K);
    rep.observed.assign(K, 0.0);
    rep.expected.assign(K, 0.0);

    double e_tot = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        rep.bin_lo[k] = a + static_cast<double>(k) * w;
        rep.expected[k] = adaptive_quad(
            [&](double yv) { return std::exp(theta * yv) / R(yv); },
            rep.bin_lo[k], rep.bin_lo[k] + w);
        e_tot += rep.expected[k];
    }
    if (!(e_tot > 0.0)) throw BadParam("occupation_check: empty expected mass");
    for (std::size_t k = 0; k < K; ++k) rep.expected[k] /= e_tot;

    double T = std::accumulate(tot.begin(), tot.end(), 0.0);
    if (!(T > 0.0))
        throw InsufficientMass("occupation_check: the excursions never visit the range");
    rep.min_bin_effective_n = kInf;
    for (std::size_t k = 0; k < K; ++k) {
        double col = 0.0, ssq = 0.0;
        for (std::size_t e = 0; e < N; ++e) {
            col += mass[e][k];
            ssq += mass[e][k] * mass[e][k];
        }
        rep.observed[k] = col / T;
        double neff = ssq > 0.0 ? col * col / ssq : 0.0;
        rep.min_bin_effective_n = std::min(rep.min_bin_effective_n, neff);
    }
    if (rep.min_bin_effective_n < 30.0)
        throw InsufficientMass("occupation_check: thinnest bin has " +
                               std::to_string(rep.min_bin_effective_n) +
                               " effective excursions, need 30");

    // Hotelling statistic on the mean-zero contrasts m_ek - p_k T_e over the
    // first K-1 bins (the last is linearly dependent); the sample covariance
    // absorbs the correlation between bins.
    std::size_t D = K - 1;
    std::vector<double> ubar(D, 0.0);
    std::vector<std::vector<double>> u(N, std::vector<double>(D, 0.0));
    for (std::size_t e = 0; e < N; ++e)
        for (std::size_t k = 0; k < D; ++k) {
            u[e][k] = mass[e][k] - rep.expected[k] * tot[e];
            ubar[k] += u[e][k];
        }
    for (std::size_t k = 0; k < D; ++k) ubar[k] /= static_cast<double>(N);
    std::vector<double> S(D * D, 0.0);
    for (std::size_t e = 0; e < N; ++e)
        for (std::size_t i = 0; i < D; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                S[i * D + j] += (u[e][i] - ubar[i]) * (u[e][j] - ubar[j]);
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            S[i * D + j] /= static_cast<double>(N - 1);
            S[j * D + i] = S[i * D + j];
        }
    std::vector<double> x = solve_spd(S, ubar);
    double t2 = 0.0;
    for (std::size_t k = 0; k < D; ++k) t2 += ubar[k] * x[k];
    t2 *= static_cast<double>(N);
    rep.chi_square = t2;
    rep.dof = static_cast<int>(D);
    rep.chi_p = chi_square_sf(t2, rep.dof);

    // KS of the visited-position distribution against the normalized density,
    // resolved on a fine grid of the range; effective sample size taken as
    // the number of contributing excursions.
    std::size_t grid_n = 256;
    std::vector<double> cdf(grid_n + 1, 0.0);
    for (std::size_t g = 0; g < grid_n; ++g) {
        double lo = a + (M - a) * static_cast<double>(g) / static_cast<double>(grid_n);
        double hi = a + (M - a) * static_cast<double>(g + 1) / static_cast<double>(grid_n);
        cdf[g + 1] = cdf[g] + adaptive_quad([&](double yv) { return std::exp(theta * yv) / R(yv); },
                                            lo, hi, 1e-7);
    }
    for (auto& c : cdf) c /= cdf.back();

    std::vector<std::pair<double, double>> seg; // (position, weighted duration)
    std::size_t contributing = 0;
    for (std::size_t e = 0; e < N; ++e) {
        const Path& p = excursions[e].path;
        double we = excursions[e].weight;
        bool any = false;
        for (std::size_t i = 0; i + 1 < p.times.size(); ++i) {
            double v0 = p.values[i];
            if (!std::isfinite(v0)) continue;
            double v1 = p.values[i + 1];
            double dt = p.times[i + 1] - p.times[i];
            if (!(dt > 0.0)) continue;
            double v = (std::isfinite(v1) && std::abs(v1 - v0) < 0.5)
                           ? 0.5 * (v0 + v1)
                           : v0;
            if (v < a || v >= M) continue;
            seg.emplace_back(v, we * dt);
            any = true;
        }
        if (any) ++contributing;
    }
    std::sort(seg.begin(), seg.end());
    double run = 0.0, d = 0.0;
    for (const auto& s : seg) {
        double pos = (s.first - a) / (M - a) * static_cast<double>(grid_n);
        std::size_t gi = std::min(static_cast<std::size_t>(pos), grid_n - 1);
        double frac = pos - static_cast<double>(gi);
        double F = cdf[gi] + frac * (cdf[gi + 1] - cdf[gi]);
        d = std::max(d, std::abs(run / T - F));
        run += s.second;
        d = std::max(d, std::abs(run / T - F));
    }
    rep.ks_statistic = d;
    double ne = static_cast<double>(contributing);
    double en = std::sqrt(ne);
    rep.ks_p = kolmogorov_sf((en + 0.12 + 0.11 / en) * d);

    rep.pass = rep.chi_p > 0.01;
    rep.note = "chi-square is a Hotelling statistic over per-excursion bin masses; "
               "the KS p-value counts excursions, not segments, as sample size";
    return rep;
}

ScalingReport excursion_scaling_check(const std::vector<ExcursionSample>& at_y,
                                      const std::vector<ExcursionSample>& at_y_plus_z,
                                      const RateFunction& R, double theta, double z) {
    if (!(z >= 0.0)) throw BadParam("excursion_scaling_check: need z >= 0");
    if (at_y.size() < 20 || at_y_plus_z.size() < 20)
        throw TooSmall("excursion_scaling_check: need at least 20 excursions per batch");

    ScalingReport rep;
    rep.z = z;

    std::vector<double> lt2, mn2;
    lt2.reserve(at_y_plus_z.size());
    for (const auto& s : at_y_plus_z) {
        lt2.push_back(s.lifetime);
        mn2.push_back(s.min_level);
    }
    rep.t_marginal = 0.5 * median_of(lt2);

    std::vector<double> lt1, mn1, mg1, mg2;
    lt1.reserve(at_y.size());
    for (const auto& s : at_y) {
        Path tp = phi_transform(s.path, R, z);
        lt1.push_back(tp.zeta);
        mn1.push_back(s.min_level + z);
        mg1.push_back(value_at(tp, rep.t_marginal));
    }
    for (const auto& s : at_y_plus_z) mg2.push_back(value_at(s.path, rep.t_marginal));

    KsResult kl = ks_two_sample(lt1, lt2, 101);
    KsResult km = ks_two_sample(mn1, mn2, 202);
    KsResult kg = ks_two_sample(mg1, mg2, 303);
    rep.ks_lifetime = kl.statistic;
    rep.ks_lifetime_p = kl.p_value;
    rep.ks_min = km.statistic;
    rep.ks_min_p = km.p_value;
    rep.ks_marginal = kg.statistic;
    rep.ks_marginal_p = kg.p_value;

    rep.mass_ratio = at_y_plus_z.front().weight / at_y.front().weight;
    rep.mass_ratio_expected = std::exp(theta * z);

    double crit = ks_critical(0.01, at_y.size(), at_y_plus_z.size());
    bool mass_ok = std::abs(rep.mass_ratio - rep.mass_ratio_expected) <=
                   1e-9 * rep.mass_ratio_expected + 1e-12;
    rep.pass = kl.statistic < crit && km.statistic < crit && kg.statistic < crit && mass_ok;
    rep.note = "transformed batch at y compared against the batch at y+z; "
               "marginals read at half the median lifetime";
    return rep;
}

GluedExtension glue_recurrent_extension(const LevyModel& model, const RateFunction& R,
                                        double theta, double a_threshold,
                                        double T_horizon, std::size_t n_real,
                                        std::uint64_t seed,
                                        std::optional<double> x_start) {
    if (!(theta > 0.0)) throw BadParam("glue_recurrent_extension: theta must be positive");
    if (!(T_horizon > 0.0)) throw BadParam("glue_recurrent_extension: horizon must be positive");
    if (n_real == 0) throw BadParam("glue_recurrent_extension: need at least one excursion");
    if (!std::isfinite(a_threshold))
        throw BadParam("glue_recurrent_extension: threshold must be finite");

    IntegralDecision nb = integral_exp_over_R(R, theta, a_threshold);
    if (nb.verdict == IntegralVerdict::Divergent)
        throw ThresholdTooHigh("glue_recurrent_extension: the neglected-time bound diverges; "
                               "theta is too large for this rate tail");
    if (nb.verdict == IntegralVerdict::Unknown)
        throw UnknownTail("glue_recurrent_extension: cannot bound the neglected time: " +
                          nb.detail);

    CramerInfo ci = cramer_theta(model);
    bool continuous = ci.root.has_value();
    LevyModel tilted = model;
    double x_proxy = 0.0;
    if (continuous) {
        if (std::abs(*ci.root - theta) > 1e-6 * std::max(1.0, std::abs(theta)))
            throw BadParam("glue_recurrent_extension: theta must equal the root " +
                           std::to_string(*ci.root) + " in the continuous regime");
        tilted = esscher_tilt(model, theta);
        x_proxy = a_threshold + std::max(20.0, 10.0 / theta);
    } else {
        bool feasible = !ci.feasible_empty &&
                        (theta < ci.feasible_hi ||
                         (ci.feasible_hi_closed && theta == ci.feasible_hi));
        if (!feasible)
            throw BadParam("glue_recurrent_extension: theta is outside the feasible set");
    }

    GluedExtension g;
    g.intensity = std::exp(theta * a_threshold);
    g.neglect_per_local = nb.value;

    double sigma_t = 0.0;
    double local = 0.0;

    if (x_start) {
        Rng r0(seed, streams::glue, (1ull << 40));
        RecSpec s0;
        s0.to_explosion = true;
        s0.tight_below = a_threshold + 1.0;
        double t0 = phi(R, *x_start);
        double mu = model.mean();
        if (std::isfinite(mu) && mu > 0.0) t0 /= mu;
        s0.delta = std::isfinite(t0) ? std::max(t0, 1e-6) / 512.0 : 1e-3;
        RecWalk w0 = walk_record(model, R, *x_start, s0, r0);
        if (!w0.exploded)
            throw Inconclusive("glue_recurrent_extension: the initial segment did not explode");
        for (std::size_t i = 0; i < w0.times.size(); ++i) {
            g.path.times.push_back(w0.times[i]);
            g.path.values.push_back(w0.values[i]);
            g.excursion_id.push_back(0);
        }
        g.path.times.push_back(w0.zeta);
        g.path.values.push_back(kInf);
        g.excursion_id.push_back(0);
        sigma_t = w0.zeta;
    }

    Rng arr(seed, streams::glue, 0);
    std::size_t glued = 0;
    for (std::size_t k = 0; k < n_real; ++k) {
        double gap = arr.exponential() / g.intensity;

        std::optional<ExcursionSample> s;
        for (std::uint64_t attempt = 0; attempt < 5 && !s; ++attempt) {
            std::uint64_t slot = ((3ull + attempt) << 40) + k;
            if (continuous) {
                ContinuousFail fail;
                s = continuous_one(model, tilted, R, theta, a_threshold, x_proxy,
                                   seed, slot, fail);
            } else {
                s = jump_in_one(model, R, theta, a_threshold, seed, slot);
            }
        }
        if (!s)
            throw Inconclusive("glue_recurrent_extension: excursion sampling kept failing");

        if (sigma_t + s->lifetime > T_horizon) break;

        local += gap;
        for (std::size_t i = 0; i < s->path.times.size(); ++i) {
            double t = s->path.times[i];
            double v = s->path.values[i];
            if (s->entry_mode == ExcursionSample::Entry::Continuous && i == 0 &&
                !g.path.times.empty())
                continue; // the previous sentinel already marks the junction
            g.path.times.push_back(sigma_t + t);
            g.path.values.push_back(v);
            g.excursion_id.push_back(static_cast<int>(glued) + 1);
        }
        g.excursion_min.push_back(s->min_level);
        g.excursion_lifetime.push_back(s->lifetime);
        g.arrival_local_time.push_back(local);
        sigma_t += s->lifetime;
        ++glued;
    }

    g.local_time_span = local;
    g.total_duration = sigma_t;
    g.path.status = Path::Status::Alive;
    g.path.horizon = sigma_t;
    g.neglect_fraction =
        sigma_t > 0.0 ? local * g.neglect_per_local / sigma_t : kInf;
    g.note = std::to_string(glued) + " excursions glued";
    if (g.neglect_fraction >= 0.05)
        throw ThresholdTooHigh("glue_recurrent_extension: the neglected-time bound is " +
                               std::to_string(100.0 * g.neglect_fraction) +
                               " percent of the glued duration; lower a_threshold");
    return g;
}

CramerTable cramer_limit_check(const LevyModel& model, const RateFunction& R,
                               double theta_star, double y,
                               const std::vector<double>& x_grid, std::size_t n,
                               std::uint64_t seed) {
    if (x_grid.empty()) throw BadParam("cramer_limit_check: empty x grid");
    for (double x : x_grid)
        if (!(x > y)) throw BadParam("cramer_limit_check: every x must sit above y");
    if (n < 20) throw BadParam("cramer_limit_check: need at least 20 paths per level");

    CramerInfo ci = cramer_theta(model);
    if (!ci.root)
        throw NotCramer("cramer_limit_check: the model has no positive root");
    if (std::abs(*ci.root - theta_star) > 1e-6 * std::max(1.0, std::abs(theta_star)))
        throw NotCramer("cramer_limit_check: theta_star does not match the root " +
                        std::to_string(*ci.root));
    esscher_tilt(model, theta_star); // requires the closed-form tilt to exist

    // hitting y before explosion is a clock-free event: the change of time
    // runs through every finite level, so it happens iff the underlying path
    // ever reaches y
    (void)R;

    double dt = model.is_pure_compound_poisson()
                    ? 0.05
                    : (model.has_jumps() ? 0.01 : 0.1);
    double mu = model.mean();

    CramerTable tab;
    tab.theta = theta_star;
    tab.y = y;
    if (model.family() == LevyModel::Family::BrownianDrift) {
        tab.expected_constant = std::exp(theta_star * y);
        tab.have_constant = true;
    }

    for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
        double x = x_grid[xi];
        double horizon = 60.0 + 15.0 * (x - y);
        if (std::isfinite(mu) && mu > 0.0) horizon = 60.0 + 15.0 * (x - y) / mu;
        std::size_t crossed = 0;
        for (std::size_t p = 0; p < n; ++p) {
            Rng rng(seed, streams::cramer,
                    (static_cast<std::uint64_t>(xi) << 40) + p);
            PassageSample ps = first_passage_below(model, x, y, horizon, dt, rng);
            if (ps.crossed) ++crossed;
        }
        CramerRow row;
        row.x = x;
        row.n = n;
        row.p_hat = static_cast<double>(crossed) / static_cast<double>(n);
        double boost = std::exp(theta_star * x);
        row.scaled = boost * row.p_hat;
        row.se_scaled = boost * std::sqrt(std::max(row.p_hat * (1.0 - row.p_hat), 0.0) /
                                          static_cast<double>(n));
        tab.rows.push_back(row);
    }
    tab.note = "probabilities estimated on the underlying process; the clock "
               "change cannot stop a path short of any finite level";
    return tab;
}

} // namespace tclevy
