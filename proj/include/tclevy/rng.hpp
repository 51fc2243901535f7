#pragma once

#include <cstdint>
#include <limits>

namespace tclevy {

// Counter-based generator (Philox 4x32, 10 rounds). A draw is a pure
// function of (key, counter), so independent streams are defined by naming,
// not by consumption order: every (seed, stream, slot) triple owns its own
// key and sequences never overlap regardless of how work is scheduled.
// Stream ids group draws by purpose (one per operation), slot is usually a
// path index.
class Rng {
  public:
    using result_type = std::uint64_t;

    Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t slot = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()();

    // Uniform on (0,1): never returns 0 or 1, safe for log() and inverse CDFs.
    double uniform();
    // Standard normal via polar Box-Muller (stateless across pairs is not
    // needed; determinism holds because the engine itself is deterministic).
    double normal();
    double exponential(); // mean 1
    // Uniform on {0,...,n-1}.
    std::uint64_t below(std::uint64_t n);

  private:
    void refill();

    std::uint32_t key_[2];
    std::uint64_t counter_hi_;
    std::uint64_t counter_lo_;
    std::uint32_t block_[4];
    int have_; // unread 32-bit words in block_
    bool cached_normal_valid_ = false;
    double cached_normal_ = 0.0;
};

// Stream ids used across the library. Fixed numbers keep outputs stable when
// operations are added.
namespace streams {
inline constexpr std::uint64_t increments = 1;
inline constexpr std::uint64_t first_passage = 2;
inline constexpr std::uint64_t renewal = 3;
inline constexpr std::uint64_t overshoot = 4;
inline constexpr std::uint64_t entrance = 5;
inline constexpr std::uint64_t speed = 6;
inline constexpr std::uint64_t excursion_entry = 7;
inline constexpr std::uint64_t excursion_path = 8;
inline constexpr std::uint64_t glue = 9;
inline constexpr std::uint64_t explosion = 10;
inline constexpr std::uint64_t ks_permutation = 11;
inline constexpr std::uint64_t cramer = 12;
inline constexpr std::uint64_t occupation = 13;
inline constexpr std::uint64_t calibration = 14;
inline constexpr std::uint64_t scratch = 15;
} // namespace streams

} // namespace tclevy
