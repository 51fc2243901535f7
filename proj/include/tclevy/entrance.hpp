#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tclevy/levy.hpp"
#include "tclevy/rate.hpp"

namespace tclevy {

// One start level of the from-infinity study.
struct LevelStudy {
    double x0 = 0.0;
    std::vector<double> marginal; // X at t_probe, finite-valued paths only
    std::vector<double> hit_time; // first passage below b_level, crossed paths
    double finite_freq = 0.0;     // fraction of paths finite at t_probe
    double crossed_freq = 0.0;    // fraction that crossed b_level in budget
};

struct StabilizationReport {
    std::vector<LevelStudy> levels;
    std::vector<double> ks_consecutive; // KS of marginals, level i vs i+1
    bool ks_shrinks = false;            // last consecutive distance < first
    std::vector<double> proxy;          // marginal sample at the largest level
    std::string note;
};

// Simulates the time-changed process from each start level and measures how
// the law at t_probe stabilizes as the level grows; the largest level acts
// as the working stand-in for the start-from-infinity law. Requires the
// Entrance verdict; throws NotEntrance otherwise.
StabilizationReport from_infinity_study(const LevyModel& model, const RateFunction& R,
                                        const std::vector<double>& x_levels,
                                        double t_probe, double b_level, std::size_t n,
                                        std::uint64_t seed);

struct MeanHittingReport {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_crossed = 0;
    std::size_t n_censored = 0;
    std::string note;
};

// Monte Carlo mean of the first passage of the time-changed process below b,
// started at x > b. Throws CensoredMajority when more than half of the paths
// never cross within the step budget.
MeanHittingReport mean_hitting(const LevyModel& model, const RateFunction& R,
                               double x, double b, std::size_t n,
                               std::uint64_t seed);

struct UndershootReport {
    std::vector<double> levels;
    std::vector<std::vector<double>> samples; // undershoot b - X_{T_b} per level
    std::vector<std::vector<double>> ks;      // pairwise KS statistics
    double max_pairwise_ks = 0.0;
    double critical_001 = 0.0; // two-sample critical value at significance 0.01
    bool level_independent = false;
    double ks_vs_stationary = 0.0; // against the limiting undershoot marginal
    bool matches_stationary = false;
    std::string note;
};

// Collects undershoots at several levels from a far start and tests that the
// law does not depend on the level, and that it matches the stationary
// undershoot marginal from the overshoot sampler. Crossing values are not
// affected by the clock change, so the passage sampler runs on the bare
// process and the rate function plays no role here.
UndershootReport undershoot_stationarity(const LevyModel& model, const RateFunction& R,
                                         double x_proxy,
                                         const std::vector<double>& b_levels,
                                         std::size_t n, std::uint64_t seed);

struct SpeedPoint {
    double t = 0.0;
    double median_raw = 0.0; // median of phi(X_t) / (gamma t)
    double iqr_raw = 0.0;
    double median_aligned = 0.0; // median of phi(X_t) / (gamma t + phi(x0))
    double iqr_aligned = 0.0;
    std::size_t n_used = 0;
};

struct SpeedReport {
    double gamma = 0.0;
    double phi_proxy = 0.0;
    std::vector<SpeedPoint> points;         // started at x_proxy
    std::vector<SpeedPoint> points_doubled; // started at 2 * x_proxy, same streams
    double doubling_max_rel_change = 0.0;   // on aligned medians
    std::string note;
};

// Small-time speed of descent from the proxy level: reports the raw ratio
// phi(X_t)/(gamma t) and the proxy-clock-aligned ratio
// phi(X_t)/(gamma t + phi(x_proxy)). The raw ratio tends to 1 only once
// phi(x_proxy) is negligible against gamma * min(t); the aligned ratio
// removes the start offset and is the quantity the doubling diagnostic is
// evaluated on. Requires gamma = -mean > 0 (ZeroDrift otherwise), a rate
// with a power tail of index > 1, and the Entrance verdict.
SpeedReport speed_law(const LevyModel& model, const RateFunction& R, double x_proxy,
                      const std::vector<double>& t_window, std::size_t n,
                      std::uint64_t seed);

struct OccupationFlatness {
    std::vector<double> bin_mid;
    std::vector<double> bin_value; // R-weighted occupation, normalized to mean 1
    double max_rel_dev = 0.0;
    std::string note;
};

// Occupation check for the from-infinity proxy: time spent in bins of
// [lo, hi) before first passage below b_stop, weighted by R at the bin
// midpoint. Under the entrance occupation law the weighted histogram is flat.
OccupationFlatness occupation_flatness(const LevyModel& model, const RateFunction& R,
                                       double x_proxy, double b_stop, double lo,
                                       double hi, std::size_t n_bins, std::size_t n,
                                       std::uint64_t seed);

} // namespace tclevy
