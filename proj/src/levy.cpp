#include "tclevy/levy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "tclevy/common.hpp"

namespace tclevy {

namespace {
constexpr double kPi = std::numbers::pi;
}

// ---------------------------------------------------------------- JumpLaw

JumpLaw JumpLaw::exponential_up(double mean) {
    if (!(mean > 0)) throw BadParam("exponential_up: mean must be > 0");
    JumpLaw j;
    j.kind = Kind::ExponentialUp;
    j.mean_up = mean;
    return j;
}

JumpLaw JumpLaw::exponential_down(double mean) {
    if (!(mean > 0)) throw BadParam("exponential_down: mean must be > 0");
    JumpLaw j;
    j.kind = Kind::ExponentialDown;
    j.mean_down = mean;
    return j;
}

JumpLaw JumpLaw::two_sided(double mean_up, double mean_down, double p_up) {
    if (!(mean_up > 0) || !(mean_down > 0))
        throw BadParam("two_sided: jump means must be > 0");
    if (!(p_up > 0) || !(p_up < 1))
        throw BadParam("two_sided: p_up must lie in (0,1)");
    JumpLaw j;
    j.kind = Kind::TwoSidedExponential;
    j.mean_up = mean_up;
    j.mean_down = mean_down;
    j.p_up = p_up;
    return j;
}

JumpLaw JumpLaw::point_masses(std::vector<double> values, std::vector<double> weights) {
    if (values.empty() || values.size() != weights.size())
        throw BadParam("point_masses: values/weights must be non-empty and same length");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0)) throw BadParam("point_masses: weights must be > 0");
        total += w;
    }
    for (double& w : weights) w /= total;
    for (double v : values)
        if (v == 0.0) throw BadParam("point_masses: zero-size jumps not allowed");
    JumpLaw j;
    j.kind = Kind::PointMassMixture;
    j.values = std::move(values);
    j.weights = std::move(weights);
    return j;
}

double JumpLaw::mean() const {
    switch (kind) {
        case Kind::ExponentialUp: return mean_up;
        case Kind::ExponentialDown: return -mean_down;
        case Kind::TwoSidedExponential: return p_up * mean_up - (1 - p_up) * mean_down;
        case Kind::PointMassMixture: {
            double m = 0;
            for (std::size_t i = 0; i < values.size(); ++i) m += weights[i] * values[i];
            return m;
        }
    }
    return 0;
}

double JumpLaw::second_moment() const {
    switch (kind) {
        case Kind::ExponentialUp: return 2 * mean_up * mean_up;
        case Kind::ExponentialDown: return 2 * mean_down * mean_down;
        case Kind::TwoSidedExponential:
            return p_up * 2 * mean_up * mean_up + (1 - p_up) * 2 * mean_down * mean_down;
        case Kind::PointMassMixture: {
            double m = 0;
            for (std::size_t i = 0; i < values.size(); ++i)
                m += weights[i] * values[i] * values[i];
            return m;
        }
    }
    return 0;
}

double JumpLaw::mgf_neg(double theta) const {
    switch (kind) {
        case Kind::ExponentialUp:
            // J ~ Exp(mean_up): finite for theta > -1/mean_up
            if (theta * mean_up <= -1.0) return kInf;
            return 1.0 / (1.0 + theta * mean_up);
        case Kind::ExponentialDown:
            if (theta * mean_down >= 1.0) return kInf;
            return 1.0 / (1.0 - theta * mean_down);
        case Kind::TwoSidedExponential: {
            if (theta * mean_up <= -1.0 || theta * mean_down >= 1.0) return kInf;
            return p_up / (1.0 + theta * mean_up) +
                   (1 - p_up) / (1.0 - theta * mean_down);
        }
        case Kind::PointMassMixture: {
            double s = 0;
            for (std::size_t i = 0; i < values.size(); ++i)
                s += weights[i] * std::exp(-theta * values[i]);
            return s;
        }
    }
    return kInf;
}

std::complex<double> JumpLaw::mgf_neg_c(std::complex<double> q) const {
    switch (kind) {
        case Kind::ExponentialUp: return 1.0 / (1.0 + q * mean_up);
        case Kind::ExponentialDown: return 1.0 / (1.0 - q * mean_down);
        case Kind::TwoSidedExponential:
            return p_up / (1.0 + q * mean_up) + (1 - p_up) / (1.0 - q * mean_down);
        case Kind::PointMassMixture: {
            std::complex<double> s = 0;
            for (std::size_t i = 0; i < values.size(); ++i)
                s += weights[i] * std::exp(-q * values[i]);
            return s;
        }
    }
    return {};
}

std::complex<double> JumpLaw::cf(double q) const {
    return mgf_neg_c(std::complex<double>(0.0, -q));
}

double JumpLaw::sample(Rng& rng) const {
    switch (kind) {
        case Kind::ExponentialUp: return mean_up * rng.exponential();
        case Kind::ExponentialDown: return -mean_down * rng.exponential();
        case Kind::TwoSidedExponential:
            return rng.uniform() < p_up ? mean_up * rng.exponential()
                                        : -mean_down * rng.exponential();
        case Kind::PointMassMixture: {
            double u = rng.uniform();
            double acc = 0;
            for (std::size_t i = 0; i < values.size(); ++i) {
                acc += weights[i];
                if (u <= acc) return values[i];
            }
            return values.back();
        }
    }
    return 0;
}

bool JumpLaw::has_negative_support() const {
    switch (kind) {
        case Kind::ExponentialUp: return false;
        case Kind::ExponentialDown: return true;
        case Kind::TwoSidedExponential: return true;
        case Kind::PointMassMixture:
            return std::any_of(values.begin(), values.end(), [](double v) { return v < 0; });
    }
    return false;
}

bool JumpLaw::has_positive_support() const {
    switch (kind) {
        case Kind::ExponentialUp: return true;
        case Kind::ExponentialDown: return false;
        case Kind::TwoSidedExponential: return true;
        case Kind::PointMassMixture:
            return std::any_of(values.begin(), values.end(), [](double v) { return v > 0; });
    }
    return false;
}

std::string JumpLaw::describe() const {
    std::ostringstream os;
    os.precision(12);
    switch (kind) {
        case Kind::ExponentialUp: os << "exp_up,jmean=" << mean_up; break;
        case Kind::ExponentialDown: os << "exp_down,jmean=" << mean_down; break;
        case Kind::TwoSidedExponential:
            os << "two_exp,mup=" << mean_up << ",mdown=" << mean_down << ",pup=" << p_up;
            break;
        case Kind::PointMassMixture: {
            os << "points,values=";
            for (std::size_t i = 0; i < values.size(); ++i)
                os << (i ? ";" : "") << values[i];
            os << ",weights=";
            for (std::size_t i = 0; i < weights.size(); ++i)
                os << (i ? ";" : "") << weights[i];
            break;
        }
    }
    return os.str();
}

// -------------------------------------------------------------- LevyModel

void LevyModel::validate() const {
    switch (family_) {
        case Family::BrownianDrift:
            if (!(sigma2_ > 0)) throw BadParam("brownian: sigma2 must be > 0");
            break;
        case Family::CompoundPoissonDrift:
            if (!(rate_ > 0)) throw BadParam("cpoisson: rate must be > 0");
            if (jump_.kind == JumpLaw::Kind::PointMassMixture)
                throw BadParam(
                    "point-mass jumps need a Gaussian component to stay non-lattice; "
                    "use the bcp family");
            break;
        case Family::SpectrallyPositiveStable:
            if (!((alpha_ > 0 && alpha_ < 1) || (alpha_ > 1 && alpha_ < 2)))
                throw BadParam("stable: alpha must lie in (0,1) or (1,2)");
            if (!(c_st_ > 0)) throw BadParam("stable: scale must be > 0");
            break;
        case Family::BrownianCompoundPoisson:
            if (!(sigma2_ > 0)) throw BadParam("bcp: sigma2 must be > 0");
            if (!(rate_ > 0)) throw BadParam("bcp: rate must be > 0");
            break;
    }
}

LevyModel LevyModel::brownian(double a, double sigma2) {
    LevyModel m;
    m.family_ = Family::BrownianDrift;
    m.a_ = a;
    m.sigma2_ = sigma2;
    m.validate();
    return m;
}

LevyModel LevyModel::compound_poisson(double drift, double rate, JumpLaw jump) {
    LevyModel m;
    m.family_ = Family::CompoundPoissonDrift;
    m.a_ = drift;
    m.rate_ = rate;
    m.jump_ = std::move(jump);
    m.validate();
    return m;
}

LevyModel LevyModel::stable(double alpha, double scale) {
    LevyModel m;
    m.family_ = Family::SpectrallyPositiveStable;
    m.alpha_ = alpha;
    m.c_st_ = scale;
    m.validate();
    return m;
}

LevyModel LevyModel::brownian_cp(double a, double sigma2, double rate, JumpLaw jump) {
    LevyModel m;
    m.family_ = Family::BrownianCompoundPoisson;
    m.a_ = a;
    m.sigma2_ = sigma2;
    m.rate_ = rate;
    m.jump_ = std::move(jump);
    m.validate();
    return m;
}

double LevyModel::mean() const {
    switch (family_) {
        case Family::BrownianDrift: return a_;
        case Family::CompoundPoissonDrift: return a_ + rate_ * jump_.mean();
        case Family::SpectrallyPositiveStable: return alpha_ > 1 ? 0.0 : kInf;
        case Family::BrownianCompoundPoisson: return a_ + rate_ * jump_.mean();
    }
    return 0;
}

double LevyModel::variance() const {
    switch (family_) {
        case Family::BrownianDrift: return sigma2_;
        case Family::CompoundPoissonDrift: return rate_ * jump_.second_moment();
        case Family::SpectrallyPositiveStable: return kInf;
        case Family::BrownianCompoundPoisson:
            return sigma2_ + rate_ * jump_.second_moment();
    }
    return 0;
}

bool LevyModel::has_finite_variance() const {
    return family_ != Family::SpectrallyPositiveStable;
}

bool LevyModel::has_gaussian_part() const {
    return family_ == Family::BrownianDrift || family_ == Family::BrownianCompoundPoisson;
}

bool LevyModel::has_jumps() const {
    return family_ != Family::BrownianDrift;
}

bool LevyModel::spectrally_positive() const {
    switch (family_) {
        case Family::BrownianDrift: return true;
        case Family::SpectrallyPositiveStable: return true;
        case Family::CompoundPoissonDrift:
        case Family::BrownianCompoundPoisson:
            return !jump_.has_negative_support();
    }
    return false;
}

bool LevyModel::spectrally_negative() const {
    switch (family_) {
        case Family::BrownianDrift: return true;
        case Family::SpectrallyPositiveStable: return false;
        case Family::CompoundPoissonDrift:
        case Family::BrownianCompoundPoisson:
            return !jump_.has_positive_support();
    }
    return false;
}

bool LevyModel::is_pure_compound_poisson() const {
    return family_ == Family::CompoundPoissonDrift;
}

std::complex<double> LevyModel::char_exponent(double q) const {
    using namespace std::complex_literals;
    switch (family_) {
        case Family::BrownianDrift:
            return 0.5 * sigma2_ * q * q - 1i * (a_ * q);
        case Family::CompoundPoissonDrift:
            return -1i * (a_ * q) + rate_ * (1.0 - jump_.cf(q));
        case Family::SpectrallyPositiveStable: {
            if (q == 0.0) return 0.0;
            double s = q > 0 ? 1.0 : -1.0;
            double mag = c_st_ * std::fabs(std::cos(kPi * alpha_ / 2)) *
                         std::pow(std::fabs(q), alpha_);
            return mag * (1.0 - 1i * (std::tan(kPi * alpha_ / 2) * s));
        }
        case Family::BrownianCompoundPoisson:
            return 0.5 * sigma2_ * q * q - 1i * (a_ * q) +
                   rate_ * (1.0 - jump_.cf(q));
    }
    return 0;
}

double LevyModel::laplace_mgf(double theta) const {
    switch (family_) {
        case Family::BrownianDrift:
            return std::exp(-a_ * theta + 0.5 * sigma2_ * theta * theta);
        case Family::CompoundPoissonDrift: {
            double m = jump_.mgf_neg(theta);
            if (std::isinf(m)) return kInf;
            return std::exp(-a_ * theta + rate_ * (m - 1.0));
        }
        case Family::SpectrallyPositiveStable:
            // Dictionary fact; see the class comment about alpha in (1,2).
            if (theta < 0) return kInf;
            return std::exp(-c_st_ * std::pow(theta, alpha_));
        case Family::BrownianCompoundPoisson: {
            double m = jump_.mgf_neg(theta);
            if (std::isinf(m)) return kInf;
            return std::exp(-a_ * theta + 0.5 * sigma2_ * theta * theta +
                            rate_ * (m - 1.0));
        }
    }
    return kInf;
}

std::complex<double> LevyModel::laplace_exponent_neg(std::complex<double> q) const {
    switch (family_) {
        case Family::BrownianDrift:
            return -a_ * q + 0.5 * sigma2_ * q * q;
        case Family::CompoundPoissonDrift:
            return -a_ * q + rate_ * (jump_.mgf_neg_c(q) - 1.0);
        case Family::SpectrallyPositiveStable:
            throw Unsupported("laplace_exponent_neg: no closed complex form for stable");
        case Family::BrownianCompoundPoisson:
            return -a_ * q + 0.5 * sigma2_ * q * q + rate_ * (jump_.mgf_neg_c(q) - 1.0);
    }
    return 0;
}

namespace {

// Poisson count via inversion-by-products; splits large means so the
// running product cannot underflow.
std::size_t poisson_count(double mean, Rng& rng) {
    std::size_t total = 0;
    while (mean > 30.0) {
        double half = mean * 0.5;
        double l = std::exp(-half);
        double p = 1.0;
        std::size_t k = 0;
        do {
            ++k;
            p *= rng.uniform();
        } while (p > l);
        total += k - 1;
        mean -= half;
    }
    double l = std::exp(-mean);
    double p = 1.0;
    std::size_t k = 0;
    do {
        ++k;
        p *= rng.uniform();
    } while (p > l);
    return total + k - 1;
}

// Chambers-Mallows-Stuck variate for the strictly stable law, beta = +1,
// one-parametrization, unit scale. Valid for alpha in (0,1) and (1,2).
double cms_stable_beta1(double alpha, Rng& rng) {
    double t = std::tan(kPi * alpha / 2);
    double B = std::atan(t) / alpha;
    double S = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha));
    double V = kPi * (rng.uniform() - 0.5); // uniform on (-pi/2, pi/2)
    double W = rng.exponential();
    double av = alpha * (V + B);
    double x = S * std::sin(av) / std::pow(std::cos(V), 1.0 / alpha) *
               std::pow(std::cos(V - av) / W, (1.0 - alpha) / alpha);
    return x;
}

} // namespace

double LevyModel::sample_increment(double dt, Rng& rng) const {
    switch (family_) {
        case Family::BrownianDrift:
            return a_ * dt + std::sqrt(sigma2_ * dt) * rng.normal();
        case Family::CompoundPoissonDrift: {
            double v = a_ * dt;
            std::size_t k = poisson_count(rate_ * dt, rng);
            for (std::size_t i = 0; i < k; ++i) v += jump_.sample(rng);
            return v;
        }
        case Family::SpectrallyPositiveStable: {
            double sigma = std::pow(
                dt * c_st_ * std::fabs(std::cos(kPi * alpha_ / 2)), 1.0 / alpha_);
            return sigma * cms_stable_beta1(alpha_, rng);
        }
        case Family::BrownianCompoundPoisson: {
            double v = a_ * dt + std::sqrt(sigma2_ * dt) * rng.normal();
            std::size_t k = poisson_count(rate_ * dt, rng);
            for (std::size_t i = 0; i < k; ++i) v += jump_.sample(rng);
            return v;
        }
    }
    return 0;
}

std::vector<double> LevyModel::increments(double dt, std::size_t n, std::uint64_t seed,
                                          std::uint64_t stream, std::uint64_t slot) const {
    if (!(dt > 0)) throw BadParam("increments: dt must be > 0");
    if (n == 0) throw BadParam("increments: n must be >= 1");
    Rng rng(seed, stream, slot);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = sample_increment(dt, rng);
    return out;
}

std::string LevyModel::describe() const {
    std::ostringstream os;
    os.precision(12);
    switch (family_) {
        case Family::BrownianDrift:
            os << "brownian:a=" << a_ << ",s2=" << sigma2_;
            break;
        case Family::CompoundPoissonDrift:
            os << "cpoisson:drift=" << a_ << ",rate=" << rate_ << ",jump="
               << jump_.describe();
            break;
        case Family::SpectrallyPositiveStable:
            os << "stable:alpha=" << alpha_ << ",c=" << c_st_;
            break;
        case Family::BrownianCompoundPoisson:
            os << "bcp:a=" << a_ << ",s2=" << sigma2_ << ",rate=" << rate_
               << ",jump=" << jump_.describe();
            break;
    }
    return os.str();
}

namespace {

std::vector<double> parse_semilist(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t next = s.find(';', pos);
        std::string tok = s.substr(pos, next == std::string::npos ? next : next - pos);
        if (tok.empty()) throw ParseError("model: empty number in list '" + s + "'");
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw ParseError("model: bad number '" + tok + "'");
        out.push_back(v);
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

} // namespace

LevyModel LevyModel::parse(const std::string& text) {
    std::size_t colon = text.find(':');
    std::string fam = text.substr(0, colon);
    std::map<std::string, std::string> kv;
    if (colon != std::string::npos) {
        std::string rest = text.substr(colon + 1);
        std::size_t pos = 0;
        while (pos < rest.size()) {
            std::size_t comma = rest.find(',', pos);
            std::string item =
                rest.substr(pos, comma == std::string::npos ? comma : comma - pos);
            std::size_t eq = item.find('=');
            if (eq == std::string::npos || eq == 0)
                throw ParseError("model: expected key=value, got '" + item + "'");
            kv[item.substr(0, eq)] = item.substr(eq + 1);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    auto num = [&](const std::string& key, double def,
                   bool required = false) -> double {
        auto it = kv.find(key);
        if (it == kv.end()) {
            if (required) throw ParseError("model: missing parameter '" + key + "'");
            return def;
        }
        std::size_t used = 0;
        double v = std::stod(it->second, &used);
        if (used != it->second.size())
            throw ParseError("model: bad number for '" + key + "'");
        kv.erase(it);
        return v;
    };
    auto jump_law = [&]() -> JumpLaw {
        auto it = kv.find("jump");
        if (it == kv.end()) throw ParseError("model: missing 'jump=' spec");
        std::string kind = it->second;
        kv.erase(it);
        if (kind == "exp_up") return JumpLaw::exponential_up(num("jmean", 1.0));
        if (kind == "exp_down") return JumpLaw::exponential_down(num("jmean", 1.0));
        if (kind == "two_exp")
            return JumpLaw::two_sided(num("mup", 1.0), num("mdown", 1.0),
                                      num("pup", 0.5));
        if (kind == "points") {
            auto vit = kv.find("values");
            auto wit = kv.find("weights");
            if (vit == kv.end() || wit == kv.end())
                throw ParseError("model: points jump needs values= and weights=");
            auto values = parse_semilist(vit->second);
            auto weights = parse_semilist(wit->second);
            kv.erase(vit);
            kv.erase(wit);
            return JumpLaw::point_masses(std::move(values), std::move(weights));
        }
        throw ParseError("model: unknown jump kind '" + kind + "'");
    };

    LevyModel out;
    if (fam == "brownian") {
        out = brownian(num("a", 0.0), num("s2", 1.0));
    } else if (fam == "cpoisson") {
        JumpLaw j = jump_law();
        out = compound_poisson(num("drift", 0.0), num("rate", 1.0, true), std::move(j));
    } else if (fam == "stable") {
        out = stable(num("alpha", 0.0, true), num("c", 1.0));
    } else if (fam == "bcp") {
        JumpLaw j = jump_law();
        out = brownian_cp(num("a", 0.0), num("s2", 1.0), num("rate", 1.0, true),
                          std::move(j));
    } else {
        throw ParseError("model: unknown family '" + fam + "'");
    }
    if (!kv.empty())
        throw ParseError("model: unknown parameter '" + kv.begin()->first + "'");
    return out;
}

Increments simulate_increments(const LevyModel& model, double dt, std::size_t n,
                               std::uint64_t seed) {
    Increments inc;
    inc.dt = dt;
    inc.seed = seed;
    inc.values = model.increments(dt, n, seed);
    return inc;
}

} // namespace tclevy
