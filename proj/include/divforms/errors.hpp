#pragma once

#include <stdexcept>
#include <string>

namespace divforms {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad argument to an operation (n = 0, |z| >= 1, d not dividing D, ...)
struct DomainError : Error {
    using Error::Error;
};

// a cap or budget was exceeded, or a value no longer fits its integer type
struct SizeError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// an identity that must hold exactly failed; this is a bug, not bad input
struct InvariantViolation : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    using Error::Error;
};

// least-squares design too close to singular
struct ConditioningError : Error {
    using Error::Error;
};

}  // namespace divforms
