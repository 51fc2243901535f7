#include "tclevy/stats.hpp"

#include <algorithm>
#include <cmath>

#include "tclevy/common.hpp"
#include "tclevy/rng.hpp"

namespace tclevy {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw BadParam("mean_of: empty sample");
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) throw BadParam("sample_variance: need at least 2 points");
    double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double median_of(std::vector<double> v) { return quantile_of(std::move(v), 0.5); }

double quantile_of(std::vector<double> v, double q) {
    if (v.empty()) throw BadParam("quantile_of: empty sample");
    if (q < 0 || q > 1) throw BadParam("quantile_of: q outside [0,1]");
    std::sort(v.begin(), v.end());
    double pos = q * static_cast<double>(v.size() - 1);
    std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    double frac = pos - static_cast<double>(i);
    return v[i] * (1 - frac) + v[i + 1] * frac;
}

double standard_error(const std::vector<double>& v) {
    return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double kolmogorov_sf(double lambda) {
    if (lambda < 1e-3) return 1.0;
    if (lambda > 8.0) return 0.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 101; ++k) {
        double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::fabs(term) < 1e-16 * std::fabs(sum) || std::fabs(term) < 1e-300) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
double upper_gamma_q(double a, double x) {
    if (x < 0 || a <= 0) throw BadParam("upper_gamma_q: bad arguments");
    if (x == 0) return 1.0;
    double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // series for P(a,x), return 1 - P
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
        }
        double p = sum * std::exp(-x + a * std::log(x) - lg);
        return std::clamp(1.0 - p, 0.0, 1.0);
    }
    // continued fraction for Q(a,x) (Lentz)
    double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    double q = std::exp(-x + a * std::log(x) - lg) * h;
    return std::clamp(q, 0.0, 1.0);
}

double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        double va = a[i], vb = b[j];
        if (va <= vb)
            while (i < a.size() && a[i] == va) ++i;
        if (vb <= va)
            while (j < b.size() && b[j] == vb) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na -
                                  static_cast<double>(j) / nb));
    }
    return d;
}

} // namespace

double chi_square_sf(double x, int dof) {
    if (dof <= 0) throw BadParam("chi_square_sf: dof must be positive");
    if (x <= 0) return 1.0;
    return upper_gamma_q(0.5 * dof, 0.5 * x);
}

double ks_critical(double alpha, std::size_t m, std::size_t n) {
    if (!(alpha > 0 && alpha < 1)) throw BadParam("ks_critical: alpha in (0,1)");
    if (m == 0 || n == 0) throw BadParam("ks_critical: empty sample");
    double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    double mn = static_cast<double>(m) * static_cast<double>(n);
    return c * std::sqrt(static_cast<double>(m + n) / mn);
}

KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                       std::uint64_t seed) {
    if (a.size() < 20 || b.size() < 20)
        throw TooSmall("ks_two_sample: need at least 20 points per sample, got " +
                       std::to_string(a.size()) + " and " + std::to_string(b.size()));
    std::vector<double> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    KsResult r;
    r.n1 = a.size();
    r.n2 = b.size();
    r.statistic = ks_statistic(sa, sb);
    double m = static_cast<double>(r.n1), n = static_cast<double>(r.n2);
    double en = std::sqrt(m * n / (m + n));
    if (std::min(r.n1, r.n2) >= 100) {
        r.method = "asymptotic";
        r.p_value = kolmogorov_sf((en + 0.12 + 0.11 / en) * r.statistic);
        return r;
    }
    r.method = "permutation";
    std::vector<double> pool;
    pool.reserve(a.size() + b.size());
    pool.insert(pool.end(), a.begin(), a.end());
    pool.insert(pool.end(), b.begin(), b.end());
    const int reps = 10000;
    Rng rng(seed, streams::ks_permutation);
    int at_least = 0;
    std::vector<double> pa(a.size()), pb(b.size());
    for (int rep = 0; rep < reps; ++rep) {
        for (std::size_t k = pool.size(); k > 1; --k)
            std::swap(pool[k - 1], pool[rng.below(k)]);
        pa.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(a.size()));
        pb.assign(pool.begin() + static_cast<std::ptrdiff_t>(a.size()), pool.end());
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        if (ks_statistic(pa, pb) >= r.statistic - 1e-15) ++at_least;
    }
    r.p_value = (at_least + 1.0) / (reps + 1.0);
    return r;
}

} // namespace tclevy
