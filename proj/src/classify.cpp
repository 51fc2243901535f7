#include "tclevy/classify.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "tclevy/common.hpp"
#include "tclevy/quad.hpp"

namespace tclevy {

namespace {

// Nested integral of the zero-mean branch of (H1) for compound Poisson jumps
// on both sides: int_{-inf}^{-1} |x| Pi(-inf, x] / D(x) dx with
// D(x) = int_x^0 int_{-inf}^y Pi(-z, inf) dz dy.
double h1_nested_integral(const LevyModel& m) {
    const JumpLaw& j = m.jump();
    const double lam = m.cp_rate();

    // I(v) = int_v^inf P(J > u) du for v >= 0 (closed per jump law).
    auto up_tail_int = [&](double v) -> double {
        switch (j.kind) {
            case JumpLaw::Kind::ExponentialUp:
                return j.mean_up * std::exp(-v / j.mean_up);
            case JumpLaw::Kind::ExponentialDown: return 0.0;
            case JumpLaw::Kind::TwoSidedExponential:
                return j.p_up * j.mean_up * std::exp(-v / j.mean_up);
            case JumpLaw::Kind::PointMassMixture: {
                double s = 0.0;
                for (std::size_t i = 0; i < j.values.size(); ++i)
                    if (j.values[i] > v) s += j.weights[i] * (j.values[i] - v);
                return s;
            }
        }
        return 0.0;
    };
    // P(J <= x) for x < 0.
    auto neg_cdf = [&](double x) -> double {
        switch (j.kind) {
            case JumpLaw::Kind::ExponentialUp: return 0.0;
            case JumpLaw::Kind::ExponentialDown: return std::exp(x / j.mean_down);
            case JumpLaw::Kind::TwoSidedExponential:
                return (1.0 - j.p_up) * std::exp(x / j.mean_down);
            case JumpLaw::Kind::PointMassMixture: {
                double s = 0.0;
                for (std::size_t i = 0; i < j.values.size(); ++i)
                    if (j.values[i] <= x) s += j.weights[i];
                return s;
            }
        }
        return 0.0;
    };

    auto denom = [&](double x) {
        return lam * adaptive_quad([&](double y) { return up_tail_int(-y); }, x, 0.0,
                                   1e-10, 1e-14);
    };
    auto f = [&](double x) {
        double num = -x * lam * neg_cdf(x);
        if (num == 0.0) return 0.0;
        return num / denom(x);
    };

    double total = 0.0;
    double lo = -2.0, hi = -1.0;
    for (int k = 0; k < 40; ++k) {
        double w = adaptive_quad(f, lo, hi, 1e-8, 1e-14);
        total += w;
        if (w <= 1e-12 * std::max(total, 1e-300)) return total;
        hi = lo;
        lo *= 2.0;
    }
    return kInf; // did not settle: report divergence honestly
}

IntegralReport report_from(const IntegralDecision& d) {
    IntegralReport r;
    switch (d.verdict) {
        case IntegralVerdict::Finite:
            r.finite = true;
            r.value = d.value;
            r.detail = d.detail;
            return r;
        case IntegralVerdict::Divergent:
            r.finite = false;
            r.value = kInf;
            r.detail = d.detail;
            return r;
        case IntegralVerdict::Unknown: throw UnknownTail(d.detail);
    }
    return r;
}

} // namespace

H1Record check_H1(const LevyModel& model) {
    H1Record rec;
    double mu = model.mean();
    if (std::isfinite(mu) && mu < 0) {
        rec.holds = true;
        rec.branch = H1Record::Branch::NegativeMean;
        rec.detail = "mean " + std::to_string(mu) + " lies in (-inf, 0)";
        return rec;
    }
    if (mu == 0.0) {
        if (model.spectrally_positive()) {
            rec.holds = true;
            rec.branch = H1Record::Branch::FamilyFact;
            rec.detail = "no negative jumps: the descending ladder height is a "
                         "unit drift, its mean is 1";
            return rec;
        }
        if (model.family() == LevyModel::Family::CompoundPoissonDrift &&
            model.jump().has_negative_support() &&
            model.jump().has_positive_support()) {
            double v = h1_nested_integral(model);
            rec.holds = std::isfinite(v);
            rec.branch = H1Record::Branch::ZeroMeanIntegral;
            std::ostringstream os;
            os << "zero mean; nested tail integral = " << v
               << (rec.holds ? " (finite)" : " (divergent)");
            rec.detail = os.str();
            return rec;
        }
        if (model.has_finite_variance()) {
            rec.holds = true;
            rec.branch = H1Record::Branch::FamilyFact;
            rec.detail = "zero mean with finite second moment";
            return rec;
        }
        throw Undecidable("check_H1: zero-mean model outside the handled cases");
    }
    rec.holds = false;
    rec.branch = H1Record::Branch::Fails;
    rec.detail = std::isinf(mu) ? "mean is +infinity"
                                : "mean " + std::to_string(mu) + " is positive";
    return rec;
}

IntegralReport entrance_test(const LevyModel& model, const RateFunction& R) {
    RenewalFunction nu = renewal_plus(model);
    double s = nu.asymptote_exponent();
    IntegralDecision d = integral_power_over_R(
        R, s, 1.0, [&nu](double y) { return nu(y); });
    IntegralReport r = report_from(d);
    r.detail = "weight: renewal evaluator (" + nu.note() + "); " + r.detail;
    return r;
}

IntegralReport regular_test(const LevyModel& model, const RateFunction& R,
                            double theta) {
    if (!(theta > 0)) throw BadParam("regular_test: theta must be > 0");
    double v = model.laplace_mgf(theta);
    if (!(v <= 1.0 + 1e-9))
        throw BadParam("regular_test: theta=" + std::to_string(theta) +
                       " outside the feasible set (mgf=" + std::to_string(v) + ")");
    return report_from(integral_exp_over_R(R, theta, 1.0));
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Entrance: return "Entrance";
        case Verdict::RegularContinuous: return "RegularContinuous";
        case Verdict::RegularJumpIn: return "RegularJumpIn";
        case Verdict::NoExtension: return "NoExtension";
        case Verdict::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

BoundaryReport classify_boundary(const LevyModel& model, const RateFunction& R) {
    BoundaryReport out;
    out.h2 = cramer_theta(model);

    bool h1_known = true;
    try {
        out.h1 = check_H1(model);
    } catch (const Undecidable& e) {
        h1_known = false;
        out.h1.detail = e.what();
    }

    auto decide_entrance = [&](const std::string& regular_blurb) {
        if (!h1_known) {
            out.verdict = Verdict::Indeterminate;
            out.reason = regular_blurb + "(H1) undecidable: " + out.h1.detail;
            return;
        }
        if (!out.h1.holds) {
            out.verdict = Verdict::NoExtension;
            out.reason = regular_blurb + "(H1) fails (" + out.h1.detail + ")";
            return;
        }
        out.entrance_integral = entrance_test(model, R);
        if (out.entrance_integral.finite) {
            out.verdict = Verdict::Entrance;
            out.reason = "(H1) holds and the entrance integral is finite";
        } else {
            out.verdict = Verdict::NoExtension;
            out.reason = regular_blurb +
                         "(H1) holds but the entrance integral diverges";
        }
    };

    try {
        if (out.h2.root) {
            double root = *out.h2.root;
            IntegralReport rep = regular_test(model, R, root);
            out.regular_integrals.emplace_back(root, rep);
            if (rep.finite) {
                out.verdict = Verdict::RegularContinuous;
                out.theta_star = root;
                out.reason = "Cramer root with a finite regular integral";
            } else {
                out.verdict = Verdict::NoExtension;
                out.reason = "Cramer root exists but the regular integral at the "
                             "root diverges; a jump-in extension needs strict "
                             "inequality and entrance needs (H1)";
            }
        } else if (!out.h2.feasible_empty) {
            TailClass t = R.tail_pos();
            if (!t.known)
                throw UnknownTail("rate tail order unknown: cannot locate the "
                                  "jump-in theta interval");
            double hi = std::min(out.h2.feasible_hi, t.q);
            if (hi > 0) {
                out.verdict = Verdict::RegularJumpIn;
                out.theta_lo = 0.0;
                out.theta_hi = hi;
                out.theta_hi_closed = (t.q <= out.h2.feasible_hi) && (t.p > 1.0);
                double probe = out.theta_hi_closed ? hi : 0.5 * hi;
                IntegralReport rep = regular_test(model, R, probe);
                out.regular_integrals.emplace_back(probe, rep);
                out.reason = "mgf stays strictly below 1; every theta below the "
                             "exponential rate of R gives a finite regular "
                             "integral (jump-in entrance law)";
            } else {
                decide_entrance("no theta has a finite regular integral "
                                "(rate function grows too slowly); ");
            }
        } else {
            decide_entrance("");
        }
    } catch (const UnknownTail& e) {
        out.verdict = Verdict::Indeterminate;
        out.reason = e.what();
    } catch (const Undecidable& e) {
        out.verdict = Verdict::Indeterminate;
        out.reason = e.what();
    }

    // Explosion expectation: drift to +infinity with an integrable 1/R tail.
    try {
        double mu = model.mean();
        if (std::isinf(mu) && mu > 0 &&
            model.family() == LevyModel::Family::SpectrallyPositiveStable) {
            IntegralDecision d =
                integral_power_over_R(R, model.alpha() - 1.0, 1.0);
            out.explosion_expected = d.verdict == IntegralVerdict::Finite;
        } else if (std::isfinite(mu) && mu > 0) {
            out.explosion_expected = std::isfinite(phi(R, 1.0));
        } else {
            out.explosion_expected = false;
        }
    } catch (const Error&) {
        out.explosion_expected = false;
    }
    return out;
}

std::string BoundaryReport::to_json() const {
    nlohmann::json j;
    auto finite_or = [](double v) {
        return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf");
    };
    const char* branch = "fails";
    switch (h1.branch) {
        case H1Record::Branch::NegativeMean: branch = "negative_mean"; break;
        case H1Record::Branch::ZeroMeanIntegral: branch = "zero_mean_integral"; break;
        case H1Record::Branch::FamilyFact: branch = "family_fact"; break;
        case H1Record::Branch::Fails: branch = "fails"; break;
    }
    j["h1"] = {{"holds", h1.holds}, {"branch", branch}, {"detail", h1.detail}};
    nlohmann::json h2j;
    if (h2.root)
        h2j["root"] = *h2.root;
    else
        h2j["root"] = nullptr;
    h2j["feasible_empty"] = h2.feasible_empty;
    h2j["feasible_hi"] = finite_or(h2.feasible_hi);
    h2j["feasible_hi_closed"] = h2.feasible_hi_closed;
    h2j["note"] = h2.note;
    j["h2"] = h2j;
    j["entrance_integral"] = {{"finite", entrance_integral.finite},
                              {"value", finite_or(entrance_integral.value)},
                              {"detail", entrance_integral.detail}};
    nlohmann::json regs = nlohmann::json::array();
    for (const auto& [theta, rep] : regular_integrals)
        regs.push_back({{"theta", theta},
                        {"finite", rep.finite},
                        {"value", finite_or(rep.value)},
                        {"detail", rep.detail}});
    j["regular_integrals"] = regs;
    j["verdict"] = verdict_name(verdict);
    if (verdict == Verdict::RegularContinuous) j["theta_star"] = theta_star;
    if (verdict == Verdict::RegularJumpIn)
        j["theta_interval"] = {{"lo", theta_lo},
                               {"hi", finite_or(theta_hi)},
                               {"hi_closed", theta_hi_closed}};
    j["reason"] = reason;
    j["explosion_expected"] = explosion_expected;
    return j.dump(2);
}

} // namespace tclevy
