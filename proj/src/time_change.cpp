#include "tclevy/time_change.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tclevy/common.hpp"

namespace tclevy {

Path make_levy_path(const LevyModel& model, double dt, double s_max,
                    std::uint64_t seed, std::uint64_t stream, std::uint64_t slot) {
    if (!(dt > 0) || !(s_max > dt)) throw BadParam("make_levy_path: bad grid");
    std::size_t n = static_cast<std::size_t>(std::ceil(s_max / dt)) + 1;
    Path p;
    p.dt_base = dt;
    p.times.resize(n);
    p.values.resize(n);
    p.values[0] = 0.0;
    std::vector<double> inc = model.increments(dt, n - 1, seed, stream, slot);
    for (std::size_t i = 0; i < n; ++i) p.times[i] = static_cast<double>(i) * dt;
    for (std::size_t i = 1; i < n; ++i) p.values[i] = p.values[i - 1] + inc[i - 1];
    return p;
}

Path apply_time_change(const Path& levy_path, const RateFunction& R, double x0,
                       const std::vector<double>& t_grid) {
    const auto& s = levy_path.times;
    const auto& xi = levy_path.values;
    if (s.size() < 2 || s.size() != xi.size())
        throw BadParam("apply_time_change: degenerate input path");
    if (xi.front() != 0.0)
        throw BadParam("apply_time_change: Levy path must start at 0");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw BadParam("apply_time_change: t_grid must be increasing");

    // Clock A(s_i), left value per step. Strictly increasing since R > 0.
    std::vector<double> A(s.size());
    A[0] = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        A[i + 1] = A[i] + (s[i + 1] - s[i]) / R(x0 + xi[i]);
    const double a_max = A.back();

    // Tail convergence test on the clock itself: the last quarter of the
    // skeleton must contribute almost nothing for an explosion call.
    std::size_t i75 = (3 * (A.size() - 1)) / 4;
    bool converged = (a_max - A[i75]) < 1e-3 * a_max;

    Path out;
    out.dt_base = levy_path.dt_base;
    out.times = t_grid;
    out.values.resize(t_grid.size());
    bool truncated = false;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        double t = t_grid[k];
        if (t >= a_max) {
            out.values[k] = kInf;
            truncated = true;
            continue;
        }
        auto it = std::upper_bound(A.begin(), A.end(), t);
        std::size_t j = static_cast<std::size_t>(it - A.begin());
        // eta(t) lies in (s_{j-1}, s_j]; take the left node.
        out.values[k] = x0 + xi[j - 1];
    }
    if (!truncated) {
        out.status = Path::Status::Alive;
    } else if (converged) {
        out.status = Path::Status::Exploded;
        out.zeta = a_max;
    } else {
        out.status = Path::Status::Censored;
        out.horizon = a_max;
    }
    return out;
}

namespace {

// Clock of the shift transform along the path; stops at the first sentinel.
// Returns the cumulative G over grid nodes plus the terminal clock value.
struct TransformClock {
    std::vector<double> G;
    double end = 0.0;        // total clock over the resolvable life
    std::size_t alive = 0;   // number of finite path nodes
};

// Limit of R(w)/R(z+w) as w grows; used for segments whose value sits above
// any finite record (paths that enter from far above the window).
double high_tail_ratio(const RateFunction& R, double z) {
    TailClass tp = R.tail_pos();
    if (tp.known) return std::exp(-tp.q * z);
    for (double w = 100.0; w >= 12.0; w *= 0.5) {
        double a = R(w), b = R(z + w);
        if (std::isfinite(a) && std::isfinite(b) && b > 0.0) return a / b;
    }
    return 1.0;
}

TransformClock transform_clock(const Path& p, const RateFunction& R, double z) {
    const auto& t = p.times;
    const auto& w = p.values;
    if (t.size() < 2 || t.size() != w.size())
        throw BadParam("phi_transform: degenerate input path");
    TransformClock c;
    c.G.assign(t.size(), 0.0);
    std::size_t i = 0;
    for (; i + 1 < t.size(); ++i) {
        if (std::isinf(w[i])) {
            if (i == 0 && !std::isinf(w[1])) {
                // leading sentinel: the path entered from above the recorded
                // range, clock runs at the high-tail rate until the first node
                c.G[1] = c.G[0] + (t[1] - t[0]) * high_tail_ratio(R, z);
                continue;
            }
            break;
        }
        double seg_end = t[i + 1];
        if (p.status == Path::Status::Exploded && std::isinf(w[i + 1]))
            seg_end = std::min(seg_end, std::max(p.zeta, t[i]));
        double g = R(w[i]) / R(z + w[i]);
        c.G[i + 1] = c.G[i] + (seg_end - t[i]) * g;
        if (std::isinf(w[i + 1])) {
            ++i;
            break;
        }
    }
    c.alive = std::isinf(w[i]) ? i : i + 1;
    c.end = c.G[c.alive < c.G.size() ? c.alive : c.G.size() - 1];
    if (c.alive >= c.G.size()) c.end = c.G.back();
    return c;
}

} // namespace

Path phi_transform(const Path& path_X, const RateFunction& R, double z) {
    TransformClock c = transform_clock(path_X, R, z);
    const auto& t = path_X.times;
    const auto& w = path_X.values;

    Path out;
    out.dt_base = path_X.dt_base;
    out.times = t;
    out.values.resize(t.size());
    bool truncated = false;
    std::size_t usable = std::min<std::size_t>(c.alive + 1, c.G.size());
    auto g_begin = c.G.begin();
    auto g_end = c.G.begin() + static_cast<std::ptrdiff_t>(usable);
    for (std::size_t k = 0; k < t.size(); ++k) {
        double tt = t[k];
        if (tt >= c.end) {
            out.values[k] = kInf;
            truncated = true;
            continue;
        }
        auto it = std::upper_bound(g_begin, g_end, tt);
        std::size_t j = static_cast<std::size_t>(it - g_begin);
        out.values[k] = z + w[j - 1];
    }
    switch (path_X.status) {
        case Path::Status::Exploded:
            out.status = Path::Status::Exploded;
            out.zeta = c.end;
            break;
        case Path::Status::Censored:
            out.status = Path::Status::Censored;
            out.horizon = c.end;
            break;
        case Path::Status::Alive:
            out.status = truncated ? Path::Status::Censored : Path::Status::Alive;
            out.horizon = truncated ? c.end : 0.0;
            break;
    }
    return out;
}

double lifetime_of_transform(const Path& path_X, const RateFunction& R, double z) {
    if (path_X.status != Path::Status::Exploded)
        throw NotExploded("lifetime_of_transform: input path never exploded");
    TransformClock c = transform_clock(path_X, R, z);
    return c.end;
}

double round_trip_deviation(const Path& path_X, const RateFunction& R, double z) {
    TransformClock fwd = transform_clock(path_X, R, z);
    Path U = phi_transform(path_X, R, z);
    TransformClock back = transform_clock(U, R, -z);

    // back.G is the integral of a per-segment-constant rate over U's grid, so
    // it is exactly piecewise linear; evaluate it at the forward image of
    // each input node and compare with the node's own time.
    std::size_t bl = std::min(back.alive, back.G.size() - 1);
    std::size_t fl = std::min(fwd.alive, fwd.G.size() - 1);
    double dev = 0.0;
    for (std::size_t i = 0; i <= fl; ++i) {
        double a = fwd.G[i];
        if (!(a <= U.times[bl])) break;
        auto it = std::upper_bound(U.times.begin(),
                                   U.times.begin() + static_cast<std::ptrdiff_t>(bl + 1), a);
        std::size_t k = static_cast<std::size_t>(it - U.times.begin());
        if (k == 0) continue;
        --k;
        double lam = back.G[k];
        if (k < bl) {
            double t0 = U.times[k], t1 = U.times[k + 1];
            if (t1 > t0) lam += (a - t0) / (t1 - t0) * (back.G[k + 1] - back.G[k]);
        }
        dev = std::max(dev, std::abs(lam - path_X.times[i]));
    }
    return dev;
}

ExplosionProbe explosion_probe(const LevyModel& model, const RateFunction& R,
                               double x0, double horizon_s, std::size_t n_paths,
                               std::uint64_t seed) {
    if (!(horizon_s > 0) || n_paths == 0)
        throw BadParam("explosion_probe: need positive horizon and paths");
    ExplosionProbe out;
    double mu = model.mean();
    if (!(mu > 0)) {
        out.explosion_freq = 0.0;
        out.note = "mean(xi_1) <= 0: the path oscillates or drifts down, the "
                   "clock diverges and no explosion occurs";
        return out;
    }

    bool phi_finite = false;
    double phi_at_x0 = kInf;
    try {
        phi_at_x0 = phi(R, x0);
        phi_finite = std::isfinite(phi_at_x0);
    } catch (const UnknownTail& e) {
        throw Inconclusive(std::string("explosion_probe: ") + e.what());
    }
    if (!phi_finite) {
        out.explosion_freq = 0.0;
        out.note = "remaining-clock integral diverges: the additive functional "
                   "grows without bound along upward drift";
        return out;
    }

    const std::size_t steps = 50000;
    const double dt = horizon_s / static_cast<double>(steps);
    std::size_t exploded = 0, undecided = 0;
    for (std::size_t pth = 0; pth < n_paths; ++pth) {
        Rng rng(seed, streams::explosion, pth);
        double xi = 0.0, a = 0.0, a75 = 0.0;
        for (std::size_t i = 0; i < steps; ++i) {
            a += dt / R(x0 + xi);
            xi += model.sample_increment(dt, rng);
            if (i == (3 * steps) / 4) a75 = a;
        }
        double remaining;
        if (std::isinf(mu)) {
            // no mean to scale by; fall back to the clock's own tail test
            remaining = a - a75;
        } else {
            remaining = phi(R, x0 + xi) / mu;
        }
        if (remaining < 1e-3 * a) {
            ++exploded;
            out.zeta_samples.push_back(a + (std::isinf(mu) ? 0.0 : remaining));
        } else {
            ++undecided;
        }
    }
    if (undecided * 10 > n_paths)
        throw Inconclusive("explosion_probe: " + std::to_string(undecided) + " of " +
                           std::to_string(n_paths) +
                           " paths neither settled nor clearly diverged; extend "
                           "horizon_s");
    out.explosion_freq =
        static_cast<double>(exploded) / static_cast<double>(n_paths);
    std::ostringstream note;
    note << "mean " << mu << ", remaining-clock threshold 1e-3, undecided "
         << undecided;
    out.note = note.str();
    return out;
}

} // namespace tclevy
