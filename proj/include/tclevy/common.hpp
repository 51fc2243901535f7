#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace tclevy {

// Typed failures. Everything derives from Error so callers can catch the
// whole family when they only care about pass/fail.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Rate function violates a standing requirement (positivity, boundedness
// near -infinity, evaluation outside a function's domain).
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

struct BadParam : Error {
    explicit BadParam(const std::string& msg) : Error(msg) {}
};

// Asymptotic order of an expression could not be established and the
// numerical fallback was inconclusive.
struct UnknownTail : Error {
    explicit UnknownTail(const std::string& msg) : Error(msg) {}
};

// An operation that needs an exact Cramer root was called on a model
// without one.
struct NotCramer : Error {
    explicit NotCramer(const std::string& msg) : Error(msg) {}
};

struct Unsupported : Error {
    explicit Unsupported(const std::string& msg) : Error(msg) {}
};

// Monte Carlo study could not decide (censoring, inconclusive tails, ...).
struct Inconclusive : Error {
    explicit Inconclusive(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Numerical Laplace inversion did not converge on a usable value.
struct InversionFailure : Error {
    explicit InversionFailure(const std::string& msg) : Error(msg) {}
};

// A limiting law was requested where the limit degenerates.
struct DegenerateLimit : Error {
    explicit DegenerateLimit(const std::string& msg) : Error(msg) {}
};

// An operation that needs an exploded path got one that never exploded.
struct NotExploded : Error {
    explicit NotExploded(const std::string& msg) : Error(msg) {}
};

// A condition check hit a model outside every decidable case.
struct Undecidable : Error {
    explicit Undecidable(const std::string& msg) : Error(msg) {}
};

// A study that presumes the entrance verdict got a model/rate pair the
// classifier rejects.
struct NotEntrance : Error {
    explicit NotEntrance(const std::string& msg) : Error(msg) {}
};

// A study that presumes the jump-in verdict got something else.
struct NotJumpIn : Error {
    explicit NotJumpIn(const std::string& msg) : Error(msg) {}
};

// More than half of the Monte Carlo paths never produced the event the
// estimator averages over.
struct CensoredMajority : Error {
    explicit CensoredMajority(const std::string& msg) : Error(msg) {}
};

// The speed law needs a strictly negative mean.
struct ZeroDrift : Error {
    explicit ZeroDrift(const std::string& msg) : Error(msg) {}
};

// Phase 2 of the continuous excursion sampler did not explode.
struct NoExplosionPhase2 : Error {
    explicit NoExplosionPhase2(const std::string& msg) : Error(msg) {}
};

// Histogram cells do not carry enough effective samples for the test.
struct InsufficientMass : Error {
    explicit InsufficientMass(const std::string& msg) : Error(msg) {}
};

// The gluing threshold neglects more small-excursion time than budgeted.
struct ThresholdTooHigh : Error {
    explicit ThresholdTooHigh(const std::string& msg) : Error(msg) {}
};

// A statistical test got fewer observations than it can handle.
struct TooSmall : Error {
    explicit TooSmall(const std::string& msg) : Error(msg) {}
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace tclevy
