#pragma once

#include <stdexcept>
#include <string>

namespace gexp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A test function produced a non-finite value.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// The time stepper produced a non-finite value.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// An interpolated function was queried outside the grid it was sampled on.
class CoverageError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Numerical results contradict an invariant they must satisfy.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Malformed input: bad weights, bad grid, bad config file.
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace gexp
