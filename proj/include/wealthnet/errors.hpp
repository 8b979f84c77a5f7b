#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wealthnet {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-parsable tag used as the CLI error prefix.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept = 0;
};

/// A parameter violates its documented domain.
class ParameterError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "parameter-error"; }
};

/// A function was evaluated outside its mathematical domain.
class DomainError : public ParameterError {
public:
    using ParameterError::ParameterError;
    const char* kind() const noexcept override { return "domain-error"; }
};

/// Too few samples (or edges) to compute the requested estimate.
class InsufficientDataError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "insufficient-data"; }
};

/// Integration produced a non-finite or non-positive wealth, or the step
/// size violates the positivity bound of the exchange sub-step.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, std::uint64_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    const char* kind() const noexcept override { return "numerical-error"; }
    std::uint64_t step() const noexcept { return step_; }

private:
    std::uint64_t step_;
};

class IoError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "io-error"; }
};

}  // namespace wealthnet
