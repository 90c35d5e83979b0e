#pragma once

#include <stdexcept>
#include <string>

namespace roughpath {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// An interval endpoint does not coincide with a grid time.
class GridAlignmentError : public Error {
public:
    using Error::Error;
};

/// A parameter is outside its admissible range (p < 1, N <= 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A required analytic capability (e.g. vertical derivative) is missing.
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// A controlled path is used against a rough path it does not reference.
class ReferenceError : public Error {
public:
    using Error::Error;
};

/// The exponent pair (p, q) violates the sewing condition 1/p + 1/q > 1,
/// or p lies outside the admissible window of an operation.
class ExponentError : public Error {
public:
    using Error::Error;
};

/// A horizontal step would leave the time horizon [0, T].
class HorizonError : public Error {
public:
    using Error::Error;
};

/// A combinatorial guard was exceeded (e.g. exhaustive enumeration cap).
class GuardError : public Error {
public:
    using Error::Error;
};

/// Malformed input file or string.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Fixed-point iteration failed to converge; carries window diagnostics
/// rendered into the message by the solver.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& msg, std::string diagnostics_json)
        : Error(msg), diagnostics(std::move(diagnostics_json)) {}
    std::string diagnostics;
};

}  // namespace roughpath
