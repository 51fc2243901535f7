#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tclevy/levy.hpp"
#include "tclevy/rate.hpp"
#include "tclevy/time_change.hpp"

namespace tclevy {

// One excursion away from the +infinity boundary. The path always ends in
// Exploded status with a final sentinel node at the lifetime; continuous
// entries additionally start at the sentinel with finite values for t > 0,
// jump-in entries start at the finite entry point.
struct ExcursionSample {
    enum class Entry { JumpIn, Continuous };

    Path path;
    Entry entry_mode = Entry::JumpIn;
    double x_entry = 0.0; // meaningful for JumpIn
    double lifetime = 0.0;
    double min_level = 0.0;
    double weight = 1.0; // mass of the conditioning used at sampling time
};

// Excursions in the jump-in regime: entry points drawn from the density
// proportional to e^{theta x} on (-inf, M], then each path runs to explosion.
// The weight records the truncated-window mass e^{theta M} / theta. Requires
// the RegularJumpIn verdict with theta inside the interval; NotJumpIn
// otherwise.
std::vector<ExcursionSample> sample_excursion_jump_in(const LevyModel& model,
                                                      const RateFunction& R,
                                                      double theta, double M,
                                                      std::size_t n,
                                                      std::uint64_t seed);

// Excursions in the continuous regime, conditioned on reaching below y:
// phase 1 runs the Esscher-tilted model (drifts down) from x_proxy to the
// first crossing of y as the from-infinity proxy; phase 2 switches to the
// untilted model at the crossing value and runs to explosion. The weight is
// e^{theta_star y}, the mass of the conditioning event. Throws NotCramer when
// theta_star is not the Cramer root and NoExplosionPhase2 when phase 2
// systematically fails to explode.
std::vector<ExcursionSample> sample_excursion_continuous(const LevyModel& model,
                                                         const RateFunction& R,
                                                         double theta_star, double y,
                                                         double x_proxy, std::size_t n,
                                                         std::uint64_t seed);

struct OccupationReport {
    std::vector<double> bin_lo;
    std::vector<double> observed; // weighted occupation share per bin
    std::vector<double> expected; // normalized e^{theta y}/R(y) mass per bin
    double chi_square = 0.0;
    int dof = 0;
    double chi_p = 1.0;
    double ks_statistic = 0.0;
    double ks_p = 1.0;
    double min_bin_effective_n = 0.0;
    bool pass = false; // chi-square p above 0.01
    std::string note;
};

// Weighted time-in-bin histogram of the excursions over [a, M] against the
// normalized density e^{theta y}/R(y). The bin range must sit below the
// conditioning level the excursions were sampled with, so every visit to the
// range is represented. Throws InsufficientMass when a bin carries fewer
// than 30 effective samples.
OccupationReport occupation_check(const std::vector<ExcursionSample>& excursions,
                                  const RateFunction& R, double theta, double a,
                                  double M, std::size_t n_bins = 12);

struct ScalingReport {
    double z = 0.0;
    double t_marginal = 0.0; // probe time for the marginal comparison
    double ks_lifetime = 0.0, ks_lifetime_p = 1.0;
    double ks_min = 0.0, ks_min_p = 1.0;
    double ks_marginal = 0.0, ks_marginal_p = 1.0;
    double mass_ratio = 0.0;          // weight(y+z) / weight(y)
    double mass_ratio_expected = 0.0; // e^{theta z}
    bool pass = false;
    std::string note;
};

// Shift-and-reclock consistency: transforms the y-conditioned excursions by
// Phi_z and compares lifetime, minimum, and a fixed-time marginal against the
// (y+z)-conditioned batch; the conditioning masses must differ by e^{theta z}.
ScalingReport excursion_scaling_check(const std::vector<ExcursionSample>& at_y,
                                      const std::vector<ExcursionSample>& at_y_plus_z,
                                      const RateFunction& R, double theta, double z);

struct GluedExtension {
    Path path;                     // excursions laid end to end, sentinel between
    std::vector<int> excursion_id; // parallel to path nodes; 0 = initial segment
    std::vector<double> excursion_min;
    std::vector<double> excursion_lifetime;
    std::vector<double> arrival_local_time;
    double local_time_span = 0.0;
    double total_duration = 0.0;
    double intensity = 0.0;          // arrival rate e^{theta a_threshold}
    double neglect_per_local = 0.0;  // integral of e^{theta y}/R above threshold
    double neglect_fraction = 0.0;   // neglected duration bound over glued duration
    std::string note;
};

// Recurrent extension by gluing: excursions with minimum below a_threshold
// arrive at local-time rate e^{theta a_threshold} and are concatenated until
// T_horizon or n_real excursions, whichever comes first. The neglected
// small-excursion duration is bounded by the local-time span times the
// integral of e^{theta y}/R(y) above the threshold; ThresholdTooHigh when
// that bound reaches 5 percent of the glued duration. An optional start
// point prepends an ordinary path segment run to its explosion.
GluedExtension glue_recurrent_extension(const LevyModel& model, const RateFunction& R,
                                        double theta, double a_threshold,
                                        double T_horizon, std::size_t n_real,
                                        std::uint64_t seed,
                                        std::optional<double> x_start = {});

struct CramerRow {
    double x = 0.0;
    double p_hat = 0.0;  // estimate of the hit-before-explosion probability
    double scaled = 0.0; // e^{theta x} p_hat
    double se_scaled = 0.0;
    std::size_t n = 0;
};

struct CramerTable {
    double theta = 0.0;
    double y = 0.0;
    std::vector<CramerRow> rows;
    double expected_constant = 0.0; // e^{theta y} / c(theta) when available
    bool have_constant = false;
    std::string note;
};

// Cramer-type limit: e^{theta x} P_x(T_y before explosion) across x must
// stabilize to a constant. Hitting-before-explosion is invariant under the
// clock change, so the probability is estimated on the bare process. For
// Brownian models the constant e^{theta y} is exact.
CramerTable cramer_limit_check(const LevyModel& model, const RateFunction& R,
                               double theta_star, double y,
                               const std::vector<double>& x_grid, std::size_t n,
                               std::uint64_t seed);

} // namespace tclevy
