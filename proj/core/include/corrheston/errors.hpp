#pragma once

#include <stdexcept>
#include <string>

namespace corrheston {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant or precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A correlation (or other bounded quantity) lies outside its admissible range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Function evaluated outside its mathematical domain (e.g. zero total variance).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inversion problem without a solution (implied vol, delta strike, barrier).
class NoSolutionError : public Error {
public:
    using Error::Error;
};

/// Numerical method failed to reach its accuracy target.
class AccuracyError : public Error {
public:
    using Error::Error;
};

/// Monte Carlo engine produced a non-finite quantity.
class EngineError : public Error {
public:
    using Error::Error;
};

}  // namespace corrheston
