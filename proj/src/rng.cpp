#include "tclevy/rng.hpp"

#include <cmath>

namespace tclevy {

namespace {

// SplitMix64, used only to spread (seed, stream, slot) into Philox keys.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline void philox_round(std::uint32_t c[4], const std::uint32_t k[2]) {
    constexpr std::uint64_t M0 = 0xD2511F53ULL;
    constexpr std::uint64_t M1 = 0xCD9E8D57ULL;
    std::uint64_t p0 = M0 * c[0];
    std::uint64_t p1 = M1 * c[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    std::uint32_t out[4];
    out[0] = hi1 ^ c[1] ^ k[0];
    out[1] = lo1;
    out[2] = hi0 ^ c[3] ^ k[1];
    out[3] = lo0;
    c[0] = out[0];
    c[1] = out[1];
    c[2] = out[2];
    c[3] = out[3];
}

} // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t slot) {
    std::uint64_t k = mix64(seed) ^ mix64(mix64(stream) + slot * 0x9e3779b97f4a7c15ULL);
    k = mix64(k);
    key_[0] = static_cast<std::uint32_t>(k);
    key_[1] = static_cast<std::uint32_t>(k >> 32);
    counter_hi_ = mix64(k ^ 0x5851f42d4c957f2dULL);
    counter_lo_ = 0;
    have_ = 0;
}

void Rng::refill() {
    std::uint32_t c[4] = {
        static_cast<std::uint32_t>(counter_lo_),
        static_cast<std::uint32_t>(counter_lo_ >> 32),
        static_cast<std::uint32_t>(counter_hi_),
        static_cast<std::uint32_t>(counter_hi_ >> 32),
    };
    std::uint32_t k[2] = {key_[0], key_[1]};
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k);
        k[0] += 0x9E3779B9u;
        k[1] += 0xBB67AE85u;
    }
    block_[0] = c[0];
    block_[1] = c[1];
    block_[2] = c[2];
    block_[3] = c[3];
    have_ = 4;
    if (++counter_lo_ == 0) ++counter_hi_;
}

Rng::result_type Rng::operator()() {
    if (have_ < 2) refill();
    std::uint64_t hi = block_[have_ - 1];
    std::uint64_t lo = block_[have_ - 2];
    have_ -= 2;
    return (hi << 32) | lo;
}

double Rng::uniform() {
    // 53 random bits into (0,1); offset by half an ulp so 0 is excluded.
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (cached_normal_valid_) {
        cached_normal_valid_ = false;
        return cached_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_normal_ = v * f;
    cached_normal_valid_ = true;
    return u * f;
}

double Rng::exponential() { return -std::log(uniform()); }

std::uint64_t Rng::below(std::uint64_t n) {
    // Modulo with rejection to stay unbiased.
    if (n == 0) return 0;
    std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
        x = (*this)();
    } while (x >= limit);
    return x % n;
}

} // namespace tclevy
