#pragma once

#include <stdexcept>
#include <string>

namespace refract {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation point outside what a backend was built to cover.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Malformed model, query or configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Bounded-variation driver with delta >= c0; no strong solution is guaranteed.
class HypothesisError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Quadrature failed to reach its tolerance inside the subdivision budget.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double achieved)
        : Error(what + " (achieved error bound " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// An internal invariant failed. Never caused by valid input.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Operation not available for this model class or backend.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

}  // namespace refract
