#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thermistor {

enum class ErrorCode {
    InvalidRange,
    TooCoarse,
    InvalidArgument,
    DimensionMismatch,
    NotConverged,
    SingularPivot,
    SyntaxError,
    UnknownIdentifier,
    ArityError,
    EvaluationError,
    HypothesisViolation,
    NonpositiveIntegral,
    NonlinearDivergence,
    UnsupportedCoefficient,
    UnsupportedDimension,
    NonIntegerStepCount,
    BoundaryViolation,
    ResidualCheckFailed,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised when a coefficient violates a declared bound. Carries the
/// sampled argument at which the violation was observed.
class HypothesisViolation : public Error {
public:
    HypothesisViolation(std::string bound, double witness, double value, const std::string& what)
        : Error(ErrorCode::HypothesisViolation, what),
          bound_(std::move(bound)), witness_(witness), value_(value) {}

    const std::string& bound() const noexcept { return bound_; }
    double witness() const noexcept { return witness_; }
    double value() const noexcept { return value_; }

private:
    std::string bound_;
    double witness_;
    double value_;
};

}  // namespace thermistor
