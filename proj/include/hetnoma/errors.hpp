#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hetnoma {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Operation called on a configuration it is not defined for
/// (e.g. a closed form that needs equal path-loss exponents).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Base for failures of the numerical machinery itself.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature did not reach the requested accuracy.
class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A finite-precision intermediate left the representable range.
class OverflowError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A mean or integral that is infinite for the given parameters.
class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Configuration invariant violated. Carries the offending field path and
/// the rule that failed so callers can report both.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, std::string rule)
        : std::invalid_argument(field + ": " + rule), field_(std::move(field)), rule_(std::move(rule)) {}

    const std::string& field() const noexcept { return field_; }
    const std::string& rule() const noexcept { return rule_; }

private:
    std::string field_;
    std::string rule_;
};

}  // namespace hetnoma
