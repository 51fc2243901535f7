#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tclevy/levy.hpp"
#include "tclevy/rate.hpp"

namespace tclevy {

// Discretized trajectory. Values hold the +infinity sentinel from the first
// post-explosion grid point onward.
struct Path {
    enum class Status { Alive, Exploded, Censored };

    std::vector<double> times;  // strictly increasing, >= 0
    std::vector<double> values;
    Status status = Status::Alive;
    double zeta = 0.0;    // explosion time estimate when status == Exploded
    double horizon = 0.0; // resolvable budget when status == Censored
    double dt_base = 0.0; // underlying uniform grid step of the Levy skeleton
};

// Uniform-grid Levy path (xi_s, s in [0, s_max]) started at 0.
Path make_levy_path(const LevyModel& model, double dt, double s_max,
                    std::uint64_t seed, std::uint64_t stream = streams::increments,
                    std::uint64_t slot = 0);

// X_t = x0 + xi_{eta(t)} where eta is the generalized inverse of the additive
// functional A(s) = int_0^s dr / R(x0 + xi_r). A uses the left grid value on
// each step; eta(t) resolves to the left grid node (cadlag convention).
// Output grid points with t >= A(s_max) get the sentinel; status becomes
// Exploded when A passed its tail convergence test, Censored otherwise.
Path apply_time_change(const Path& levy_path, const RateFunction& R, double x0,
                       const std::vector<double>& t_grid);

// Spatial shift transform: z + w at the clock h_z built from
// G(s) = int_0^s R(w_u)/R(z + w_u) du, resampled on the input grid.
Path phi_transform(const Path& path_X, const RateFunction& R, double z);

// Lifetime of the transformed path: int_0^zeta R(X_s)/R(z + X_s) ds.
// Requires an exploded input path.
double lifetime_of_transform(const Path& path_X, const RateFunction& R, double z);

// Round-trip discretization error of the shift transform: applies phi at +z
// (resampled on the path grid, which is where the truncation error enters)
// and measures how far the composed inverse clock drifts from the identity,
// sup_k |G_{-z}(t_k) - t_k|. The value sequence itself survives the round
// trip exactly, so this time deformation is the whole discrepancy in the
// graph (Skorokhod) sense; a uniform-in-value comparison would only see the
// path modulus of continuity over the clock error, which cannot refine
// linearly for diffusive paths.
double round_trip_deviation(const Path& path_X, const RateFunction& R, double z);

struct ExplosionProbe {
    double explosion_freq = 0.0;
    std::vector<double> zeta_samples; // one entry per exploding path
    std::string note;
};

// Monte Carlo explosion check: simulates the clock A(horizon_s) per path and
// declares explosion when the estimated remaining clock is below 1e-3 of the
// accumulated one. Mean <= 0 short-circuits to frequency zero.
ExplosionProbe explosion_probe(const LevyModel& model, const RateFunction& R,
                               double x0, double horizon_s, std::size_t n_paths,
                               std::uint64_t seed);

} // namespace tclevy
