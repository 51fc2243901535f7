#include "tclevy/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "tclevy/common.hpp"
#include "tclevy/stats.hpp"

namespace tclevy {

namespace {

// ------------------------------------------------------------ Talbot nodes

// Fixed-contour Talbot inversion with 32 nodes: f(x) from F(q) analytic to
// the right of the contour apex 2M/(5x).
double talbot_invert(const LevyModel& m, double x) {
    constexpr int M = 32;
    const double r = 2.0 * M / (5.0 * x);
    auto F = [&](std::complex<double> q) {
        std::complex<double> psi = m.laplace_exponent_neg(q);
        return 1.0 / psi;
    };
    double sum = 0.5 * std::exp(r * x) * std::real(F(std::complex<double>(r, 0.0)));
    for (int k = 1; k < M; ++k) {
        double phi = k * std::numbers::pi / M;
        double cot = std::cos(phi) / std::sin(phi);
        std::complex<double> s(r * phi * cot, r * phi);
        double sigma = phi + (phi * cot - 1.0) * cot;
        std::complex<double> term =
            std::exp(s * x) * F(s) * std::complex<double>(1.0, sigma);
        double re = std::real(term);
        if (!std::isfinite(re))
            throw InversionFailure("scale function inversion diverged at x=" +
                                   std::to_string(x));
        sum += re;
    }
    double w = sum * r / M;
    if (!std::isfinite(w))
        throw InversionFailure("scale function inversion produced a non-finite "
                               "value at x=" + std::to_string(x));
    return w;
}

// -------------------------------------------------------- skeleton stepping

// Successive skeleton points of a Levy path: exact event times for pure
// compound Poisson, dt-substeps with embedded jump events when a Gaussian
// part is present, plain dt increments otherwise (stable).
struct SkeletonWalker {
    const LevyModel& m;
    Rng& rng;
    double dt;
    double t = 0.0, x = 0.0;

    enum class Mode { EventDriven, GaussJump, PlainStep } mode;
    double next_jump = kInf;

    SkeletonWalker(const LevyModel& model, Rng& r, double step)
        : m(model), rng(r), dt(step) {
        if (m.is_pure_compound_poisson())
            mode = Mode::EventDriven;
        else if (m.has_gaussian_part())
            mode = Mode::GaussJump;
        else
            mode = Mode::PlainStep;
        if (m.has_jumps() && mode != Mode::PlainStep) schedule_jump();
    }

    void schedule_jump() { next_jump = t + rng.exponential() / m.cp_rate(); }

    // Advance to the next skeleton point; returns the new position.
    double step() {
        switch (mode) {
            case Mode::EventDriven: {
                double tau = next_jump - t;
                x += m.drift() * tau;
                t = next_jump;
                x += m.jump().sample(rng);
                schedule_jump();
                return x;
            }
            case Mode::GaussJump: {
                double h = std::min(dt, next_jump - t);
                double sig = std::sqrt(m.sigma2());
                x += m.drift() * h + sig * std::sqrt(h) * rng.normal();
                t += h;
                if (m.has_jumps() && t >= next_jump - 1e-15) {
                    x += m.jump().sample(rng);
                    schedule_jump();
                }
                return x;
            }
            case Mode::PlainStep:
                x += m.sample_increment(dt, rng);
                t += dt;
                return x;
        }
        return x;
    }
};

double safe_variance(const LevyModel& m) {
    return m.has_finite_variance() ? m.variance() : 1.0;
}

} // namespace

// ----------------------------------------------------------- scale function

double scale_function_W(const LevyModel& model, double x) {
    if (!model.spectrally_positive())
        throw BadParam("scale_function_W: model must be spectrally positive");
    double mu = model.mean();
    if (!(mu <= 0))
        throw BadParam("scale_function_W: model must have mean <= 0");
    if (x < 0) throw BadParam("scale_function_W: x must be >= 0");
    double w = talbot_invert(model, std::max(x, 1e-8));
    if (w < -1e-6 * std::max(1.0, std::fabs(w)))
        throw InversionFailure("scale function came out negative at x=" +
                               std::to_string(x));
    return std::max(w, 0.0);
}

// ------------------------------------------------------------- Cramer root

CramerInfo cramer_theta(const LevyModel& model) {
    CramerInfo info;
    auto g = [&](double theta) {
        double v = model.laplace_mgf(theta);
        if (std::isinf(v)) return kInf;
        return std::log(v);
    };

    // Log-spaced scan for the sign pattern of the log-mgf.
    double neg_at = -1.0, pos_after_neg = -1.0;
    bool seen_neg = false;
    double last_scanned_value = 0.0;
    for (int k = 0;; ++k) {
        double theta = 1e-12 * std::pow(10.0, k / 8.0);
        if (theta > 1e6) break;
        double v = g(theta);
        last_scanned_value = v;
        if (v < 0 && !seen_neg) {
            seen_neg = true;
        }
        if (v < 0) neg_at = theta;
        if (seen_neg && v >= 0) {
            pos_after_neg = theta;
            break;
        }
    }

    if (!seen_neg) {
        info.feasible_empty = true;
        info.note = "log-mgf non-negative for all probed theta; no feasible point";
        return info;
    }
    if (pos_after_neg < 0) {
        // negative all the way to the cap: strict inequality everywhere
        info.feasible_empty = false;
        info.feasible_hi = kInf;
        info.feasible_hi_closed = false;
        std::ostringstream os;
        os << "mgf stays below 1 for all theta probed (log-mgf "
           << last_scanned_value << " at the cap); no root";
        info.note = os.str();
        return info;
    }

    // Bisection on [neg_at, pos_after_neg], treating +inf as positive.
    double lo = neg_at, hi = pos_after_neg;
    for (int i = 0; i < 200 && (hi - lo) > 1e-14 * std::max(1.0, lo); ++i) {
        double mid = 0.5 * (lo + hi);
        double v = g(mid);
        if (v == 0.0) {
            lo = hi = mid;
            break;
        }
        (v < 0 ? lo : hi) = mid;
    }
    double root = 0.5 * (lo + hi);
    info.root = root;
    info.feasible_empty = false;
    info.feasible_hi = root;
    info.feasible_hi_closed = true;
    info.note = "unique root of E[e^{-theta X_1}] = 1 located by bisection";
    return info;
}

// ------------------------------------------------------------ Esscher tilt

LevyModel esscher_tilt(const LevyModel& model, double theta) {
    double v = model.laplace_mgf(theta);
    if (!std::isfinite(v) || std::fabs(v - 1.0) > 1e-8) {
        std::ostringstream os;
        os << "esscher_tilt: laplace_mgf(" << theta << ") = " << v
           << ", tilt needs the exact Cramer point (mgf = 1)";
        throw NotCramer(os.str());
    }
    if (theta == 0.0) return model;

    auto tilt_jump = [&](const JumpLaw& j, double& rate_factor) -> JumpLaw {
        switch (j.kind) {
            case JumpLaw::Kind::ExponentialUp: {
                double f = 1.0 / (1.0 + theta * j.mean_up);
                rate_factor = f;
                return JumpLaw::exponential_up(j.mean_up * f);
            }
            case JumpLaw::Kind::ExponentialDown: {
                double f = 1.0 / (1.0 - theta * j.mean_down);
                rate_factor = f;
                return JumpLaw::exponential_down(j.mean_down * f);
            }
            case JumpLaw::Kind::TwoSidedExponential: {
                double fu = 1.0 / (1.0 + theta * j.mean_up);
                double fd = 1.0 / (1.0 - theta * j.mean_down);
                double wu = j.p_up * fu, wd = (1.0 - j.p_up) * fd;
                rate_factor = wu + wd;
                return JumpLaw::two_sided(j.mean_up * fu, j.mean_down * fd,
                                          wu / (wu + wd));
            }
            case JumpLaw::Kind::PointMassMixture: {
                std::vector<double> w = j.weights;
                double s = 0;
                for (std::size_t i = 0; i < w.size(); ++i) {
                    w[i] *= std::exp(-theta * j.values[i]);
                    s += w[i];
                }
                rate_factor = s;
                return JumpLaw::point_masses(j.values, std::move(w));
            }
        }
        throw BadParam("esscher_tilt: unhandled jump law");
    };

    switch (model.family()) {
        case LevyModel::Family::BrownianDrift:
            return LevyModel::brownian(model.drift() - model.sigma2() * theta,
                                       model.sigma2());
        case LevyModel::Family::CompoundPoissonDrift: {
            double f = 1.0;
            JumpLaw j = tilt_jump(model.jump(), f);
            return LevyModel::compound_poisson(model.drift(), model.cp_rate() * f,
                                               std::move(j));
        }
        case LevyModel::Family::BrownianCompoundPoisson: {
            double f = 1.0;
            JumpLaw j = tilt_jump(model.jump(), f);
            return LevyModel::brownian_cp(model.drift() - model.sigma2() * theta,
                                          model.sigma2(), model.cp_rate() * f,
                                          std::move(j));
        }
        case LevyModel::Family::SpectrallyPositiveStable:
            // mgf equals 1 only at theta = 0, handled above.
            throw NotCramer("esscher_tilt: stable models have no Cramer point");
    }
    throw BadParam("esscher_tilt: unhandled family");
}

// ----------------------------------------------------------- first passage

PassageSample first_passage_below(const LevyModel& model, double x0, double level,
                                  double horizon, double dt, Rng& rng) {
    if (model.family() == LevyModel::Family::SpectrallyPositiveStable)
        throw Unsupported("first_passage_below: no crossing correction available "
                          "for stable paths");
    if (!(horizon > 0) || !(dt > 0))
        throw BadParam("first_passage_below: horizon and dt must be positive");
    PassageSample out;
    if (x0 < level) {
        out.crossed = true;
        out.pre = out.post = x0;
        return out;
    }

    double t = 0.0, x = x0;
    const double d = model.drift();

    if (model.is_pure_compound_poisson()) {
        const double rate = model.cp_rate();
        for (;;) {
            double tau = rng.exponential() / rate;
            double seg = std::min(tau, horizon - t);
            if (d < 0) {
                double t_hit = (x - level) / (-d);
                if (t_hit <= seg) {
                    out.crossed = true;
                    out.time = t + t_hit;
                    out.pre = out.post = level;
                    return out;
                }
            }
            x += d * seg;
            t += seg;
            if (seg < tau) { // ran out of horizon inside the drift segment
                out.time = t;
                out.pre = out.post = x;
                return out;
            }
            double before = x;
            x += model.jump().sample(rng);
            if (x <= level) {
                out.crossed = true;
                out.time = t;
                out.pre = before;
                out.post = x;
                return out;
            }
        }
    }

    // Gaussian part present: substeps with a bridge-crossing correction.
    const double s2 = model.sigma2();
    const double sig = std::sqrt(s2);
    const bool jumps = model.has_jumps();
    double next_jump = jumps ? rng.exponential() / model.cp_rate() : kInf;
    while (t < horizon) {
        double seg_end = std::min(horizon, next_jump);
        while (t < seg_end) {
            double h = std::min(dt, seg_end - t);
            double xn = x + d * h + sig * std::sqrt(h) * rng.normal();
            t += h;
            if (xn <= level) {
                out.crossed = true;
                out.time = t;
                out.pre = out.post = level;
                return out;
            }
            double p = std::exp(-2.0 * (x - level) * (xn - level) / (s2 * h));
            if (rng.uniform() < p) {
                out.crossed = true;
                out.time = t - 0.5 * h;
                out.pre = out.post = level;
                return out;
            }
            x = xn;
        }
        if (jumps && next_jump <= horizon) {
            double before = x;
            x += model.jump().sample(rng);
            if (x <= level) {
                out.crossed = true;
                out.time = t;
                out.pre = before;
                out.post = x;
                return out;
            }
            next_jump = t + rng.exponential() / model.cp_rate();
        }
    }
    out.time = horizon;
    out.pre = out.post = x;
    return out;
}

// ----------------------------------------------------- stationary overshoot

OvershootMeasure stationary_overshoot(const LevyModel& model, double z_far,
                                      std::size_t n, std::uint64_t seed) {
    if (!(z_far > 0)) throw BadParam("stationary_overshoot: z_far must be > 0");
    if (n == 0) throw BadParam("stationary_overshoot: n must be > 0");
    OvershootMeasure out;
    if (model.spectrally_positive()) {
        out.dirac_zero = true;
        out.mean_ladder_down = 1.0;
        out.note = "no negative jumps: the level is crossed continuously, "
                   "undershoot is an atom at zero";
        return out;
    }
    double mu = model.mean();
    if (std::isinf(mu) || mu > 0)
        throw DegenerateLimit("stationary_overshoot: mean " + std::to_string(mu) +
                              " >= 0 pushes the passage level away; the limiting "
                              "undershoot degenerates");

    const double var = safe_variance(model);
    std::size_t censored = 0;
    auto run = [&](double z, std::size_t count, std::uint64_t slot0,
                   std::vector<double>& pre, std::vector<double>& und) {
        double horizon0 = mu < 0 ? 30.0 * z / (-mu) + 2000.0
                                 : 50.0 * (z * z / var + z) + 5000.0;
        for (std::size_t i = 0; i < count; ++i) {
            Rng rng(seed, streams::overshoot, slot0 + i);
            double x = z, horizon = horizon0;
            bool done = false;
            for (int attempt = 0; attempt < 8 && !done; ++attempt) {
                PassageSample ps = first_passage_below(model, x, 0.0, horizon, 0.01, rng);
                if (ps.crossed) {
                    pre.push_back(ps.pre);
                    und.push_back(-ps.post);
                    done = true;
                } else {
                    x = ps.post; // resume the same path with a longer budget
                    horizon *= 2;
                }
            }
            if (!done) ++censored;
        }
    };

    run(z_far, n, 0, out.pre, out.undershoot);

    std::size_t ncheck = std::min<std::size_t>(n, 2000);
    std::vector<double> pre2, und2;
    run(2.0 * z_far, ncheck, n, pre2, und2);

    if (censored > (n + ncheck) / 2)
        throw Inconclusive("stationary_overshoot: more than half of the paths "
                           "never crossed within the horizon budget");

    std::ostringstream note;
    if (!out.undershoot.empty() && !und2.empty()) {
        std::vector<double> first(out.undershoot.begin(),
                                  out.undershoot.begin() +
                                      static_cast<std::ptrdiff_t>(
                                          std::min(ncheck, out.undershoot.size())));
        KsResult ks = ks_two_sample(first, und2, seed + 1);
        double crit = ks_critical(0.01, first.size(), und2.size());
        note << "stability check z vs 2z: KS distance " << ks.statistic
             << (ks.statistic < crit ? " below" : " ABOVE") << " the 1% critical value "
             << crit;
    }
    if (censored) note << "; censored paths: " << censored;
    out.note = note.str();

    // Mean strict-descent step from the starting level (one descending ladder
    // height), a finiteness certificate for the ladder mean.
    {
        std::vector<double> steps;
        double horizon = mu < 0 ? 2000.0 / std::max(-mu, 0.01) : 20000.0;
        for (std::size_t i = 0; i < 400; ++i) {
            Rng rng(seed, streams::first_passage, i);
            PassageSample ps = first_passage_below(model, 0.0, 0.0, horizon, 0.01, rng);
            if (ps.crossed) steps.push_back(-ps.post);
        }
        out.mean_ladder_down = steps.empty() ? kInf : mean_of(steps);
    }
    return out;
}

// -------------------------------------------------------------- ladder MC

std::pair<std::vector<double>, std::vector<double>> renewal_mc_table(
    const LevyModel& model, double y_max, std::size_t n_paths, std::uint64_t seed,
    double dt) {
    if (!(y_max > 0) || n_paths == 0)
        throw BadParam("renewal_mc_table: need y_max > 0 and paths > 0");
    const std::size_t cells = 257;
    std::vector<double> grid(cells), bucket(cells, 0.0);
    for (std::size_t j = 0; j < cells; ++j)
        grid[j] = y_max * static_cast<double>(j) / static_cast<double>(cells - 1);

    double mu = model.mean();
    double drop = kInf;
    if (std::isfinite(mu) && mu < 0)
        drop = std::min(300.0, 30.0 * std::max(1.0, std::sqrt(safe_variance(model))) /
                                   std::max(-mu, 0.1));

    for (std::size_t p = 0; p < n_paths; ++p) {
        Rng rng(seed, streams::renewal, p);
        SkeletonWalker walker(model, rng, dt);
        double mx = 0.0;
        for (long step = 0; step < 3000000; ++step) {
            double x = walker.step();
            if (x > mx) {
                mx = x;
                if (mx > y_max) break;
                std::size_t j = static_cast<std::size_t>(
                    std::ceil(mx / y_max * static_cast<double>(cells - 1)));
                if (j < cells) bucket[j] += 1.0;
            }
            if (mx - x > drop) break;
        }
    }
    std::vector<double> value(cells, 0.0);
    double acc = 0.0;
    for (std::size_t j = 0; j < cells; ++j) {
        acc += bucket[j];
        value[j] = acc / static_cast<double>(n_paths);
    }
    return {std::move(grid), std::move(value)};
}

// ------------------------------------------------------------ renewal_plus

double RenewalFunction::operator()(double y) const {
    if (y <= 0) {
        // SurvivalForm has positive mass at zero (paths that never rise).
        if (kind_ == RenewalKind::SurvivalForm && y == 0.0 && !table_v_.empty())
            return table_v_.front();
        return 0.0;
    }
    switch (kind_) {
        case RenewalKind::Linear: return slope_ * y;
        case RenewalKind::PowerLaw: return coef_ * std::pow(y, exponent_);
        case RenewalKind::ScaleFunction: return scale_function_W(model_, y);
        case RenewalKind::SurvivalForm:
        case RenewalKind::MonteCarlo: {
            if (table_x_.empty()) return 0.0;
            if (y >= table_x_.back()) {
                if (kind_ == RenewalKind::SurvivalForm) return table_v_.back();
                return table_v_.back() + ext_slope_ * (y - table_x_.back());
            }
            auto it = std::upper_bound(table_x_.begin(), table_x_.end(), y);
            std::size_t j = static_cast<std::size_t>(it - table_x_.begin());
            if (j == 0) {
                double frac = table_x_[0] > 0 ? y / table_x_[0] : 1.0;
                return table_v_[0] * frac;
            }
            double x0 = table_x_[j - 1], x1 = table_x_[j];
            double f = x1 > x0 ? (y - x0) / (x1 - x0) : 0.0;
            return table_v_[j - 1] * (1 - f) + table_v_[j] * f;
        }
    }
    return 0.0;
}

double RenewalFunction::asymptote_exponent() const {
    switch (kind_) {
        case RenewalKind::Linear: return 1.0;
        case RenewalKind::PowerLaw: return exponent_;
        case RenewalKind::SurvivalForm: return 0.0;
        case RenewalKind::MonteCarlo: return 1.0;
        case RenewalKind::ScaleFunction: return model_.mean() < 0 ? 0.0 : 1.0;
    }
    return 1.0;
}

RenewalFunction renewal_plus(const LevyModel& model, std::uint64_t seed) {
    RenewalFunction R(model);
    double mu = model.mean();

    if (std::isinf(mu) && mu > 0 && !model.spectrally_positive())
        throw Unsupported("renewal_plus: infinite mean with negative jumps has no "
                          "evaluator");

    if (model.family() == LevyModel::Family::SpectrallyPositiveStable) {
        R.kind_ = RenewalKind::PowerLaw;
        R.coef_ = 1.0;
        R.exponent_ = model.alpha() > 1 ? model.alpha() - 1.0 : model.alpha();
        R.note_ = "stable ladder height renewal: power law, constant fixed to 1";
        return R;
    }
    if (model.spectrally_negative() && mu == 0.0) {
        R.kind_ = RenewalKind::Linear;
        R.slope_ = 1.0;
        R.note_ = "no positive jumps and zero mean: ladder heights creep, "
                  "nu_+(x) = x up to normalization";
        return R;
    }
    if (model.spectrally_positive() && mu <= 0) {
        R.kind_ = RenewalKind::ScaleFunction;
        R.note_ = "spectrally positive: nu_+ equals the scale function of the "
                  "dual process (Laplace inversion)";
        return R;
    }
    if (mu == 0.0 && model.has_finite_variance()) {
        auto [gx, gv] = renewal_mc_table(model, 40.0, 3000, seed,
                                         model.has_gaussian_part() ? 5e-3 : 1e-3);
        R.kind_ = RenewalKind::MonteCarlo;
        R.table_x_ = std::move(gx);
        R.table_v_ = std::move(gv);
        std::size_t n = R.table_x_.size();
        std::size_t a = n / 2, b = n - 1;
        R.ext_slope_ = (R.table_v_[b] - R.table_v_[a]) /
                       (R.table_x_[b] - R.table_x_[a]);
        R.note_ = "zero mean, finite variance: ladder table with linear "
                  "asymptote, MC-calibrated slope " + std::to_string(R.ext_slope_);
        return R;
    }
    if (std::isfinite(mu) && mu < 0) {
        // all-time maximum survival table
        const std::size_t paths = 4000;
        std::vector<double> maxima;
        maxima.reserve(paths);
        double drop = std::min(300.0, 30.0 * std::max(1.0, std::sqrt(safe_variance(model))) /
                                          std::max(-mu, 0.1));
        for (std::size_t p = 0; p < paths; ++p) {
            Rng rng(seed, streams::renewal, 1000000 + p);
            SkeletonWalker walker(model, rng, model.has_gaussian_part() ? 5e-3 : 1e-3);
            double mx = 0.0;
            for (long step = 0; step < 2000000; ++step) {
                double x = walker.step();
                mx = std::max(mx, x);
                if (mx - x > drop) break;
            }
            maxima.push_back(mx);
        }
        std::sort(maxima.begin(), maxima.end());
        std::vector<double> gx, gv;
        std::size_t stride = std::max<std::size_t>(1, maxima.size() / 400);
        for (std::size_t i = 0; i < maxima.size(); i += stride) {
            gx.push_back(maxima[i]);
            gv.push_back(static_cast<double>(i + 1) / static_cast<double>(maxima.size()));
        }
        gx.push_back(maxima.back());
        gv.push_back(1.0);
        R.kind_ = RenewalKind::SurvivalForm;
        R.table_x_ = std::move(gx);
        R.table_v_ = std::move(gv);
        R.note_ = "negative mean: nu_+ proportional to the law of the all-time "
                  "maximum (MC table, k = 1)";
        return R;
    }

    // drift to +infinity or anything else with well-defined ladder heights
    auto [gx, gv] = renewal_mc_table(model, 40.0, 3000, seed,
                                     model.has_gaussian_part() ? 5e-3 : 1e-3);
    R.kind_ = RenewalKind::MonteCarlo;
    R.table_x_ = std::move(gx);
    R.table_v_ = std::move(gv);
    std::size_t n = R.table_x_.size();
    std::size_t a = n / 2, b = n - 1;
    R.ext_slope_ = (R.table_v_[b] - R.table_v_[a]) / (R.table_x_[b] - R.table_x_[a]);
    R.note_ = "ladder-height renewal table from running-maximum increments, "
              "linear extension beyond the grid";
    return R;
}

} // namespace tclevy
