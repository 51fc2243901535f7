#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tclevy/levy.hpp"

namespace tclevy {

// Ascending ladder-height renewal function nu_+ with a per-family evaluator.
// Each evaluator fixes its own multiplicative constant; downstream integral
// tests only need finiteness, which is constant-invariant.
enum class RenewalKind { Linear, ScaleFunction, PowerLaw, SurvivalForm, MonteCarlo };

class RenewalFunction {
  public:
    RenewalKind kind() const { return kind_; }
    const LevyModel& model() const { return model_; }
    const std::string& note() const { return note_; }

    double operator()(double y) const; // nu_+(y), non-negative, non-decreasing

    // s such that nu_+(y) grows like y^s for large y (0 when bounded).
    double asymptote_exponent() const;

  private:
    friend RenewalFunction renewal_plus(const LevyModel&, std::uint64_t);

    explicit RenewalFunction(LevyModel model) : model_(std::move(model)) {}

    RenewalKind kind_ = RenewalKind::Linear;
    LevyModel model_;
    double slope_ = 1.0;    // Linear
    double exponent_ = 1.0; // PowerLaw
    double coef_ = 1.0;     // PowerLaw
    std::vector<double> table_x_; // MonteCarlo / SurvivalForm grids
    std::vector<double> table_v_;
    double ext_slope_ = 0.0; // MonteCarlo linear extension beyond the table
    std::string note_;
};

RenewalFunction renewal_plus(const LevyModel& model, std::uint64_t seed = 1);

// Scale function W of the dual spectrally negative process, via numerical
// inversion of q -> 1/psi(q) on a fixed Talbot contour (32 nodes). Needs a
// spectrally positive model with mean <= 0.
double scale_function_W(const LevyModel& model, double x);

struct CramerInfo {
    std::optional<double> root;    // theta > 0 with laplace_mgf(theta) = 1
    bool feasible_empty = true;    // no theta > 0 with laplace_mgf <= 1
    double feasible_hi = 0.0;      // sup of the feasible interval (0, hi]
    bool feasible_hi_closed = false;
    std::string note;
};

// Feasible set {theta > 0 : E[e^{-theta xi_1}] <= 1} and the unique root of
// the equality when it exists (bisection on the log-mgf, tolerance 1e-10).
CramerInfo cramer_theta(const LevyModel& model);

// Exponential change of measure at theta with laplace_mgf(theta) = 1; returns
// the tilted model in closed form per family. Throws NotCramer otherwise.
LevyModel esscher_tilt(const LevyModel& model, double theta);

struct PassageSample {
    bool crossed = false;
    double time = 0.0;
    double pre = 0.0;  // position just before crossing the level
    double post = 0.0; // position at the crossing (equal to pre when creeping)
};

// First passage strictly below `level` from x0, exact for pure compound
// Poisson paths (event-driven) and for Brownian segments (bridge-corrected
// crossing inside each step). Horizon-capped; crossed=false when it runs out.
PassageSample first_passage_below(const LevyModel& model, double x0, double level,
                                  double horizon, double dt, Rng& rng);

struct OvershootMeasure {
    bool dirac_zero = false;
    std::vector<double> pre;        // xi_{T-} distance above the level
    std::vector<double> undershoot; // -(xi_T - level), zero when creeping
    double mean_ladder_down = 0.0;  // MC estimate of the mean descending ladder step
    std::string note;
};

// Limit law of (pre-undershoot, undershoot) at a far starting level. Runs a
// built-in stability comparison between z_far and 2*z_far samples.
OvershootMeasure stationary_overshoot(const LevyModel& model, double z_far,
                                      std::size_t n, std::uint64_t seed);

// Empirical ladder-height renewal table (grid, cumulative ladder counts);
// exposed so closed-form evaluators can be cross-checked against it.
std::pair<std::vector<double>, std::vector<double>> renewal_mc_table(
    const LevyModel& model, double y_max, std::size_t n_paths, std::uint64_t seed,
    double dt = 1e-3);

} // namespace tclevy
