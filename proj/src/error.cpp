#include "thermistor/error.hpp"

namespace thermistor {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidRange: return "invalid-range";
    case ErrorCode::TooCoarse: return "too-coarse";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::NotConverged: return "not-converged";
    case ErrorCode::SingularPivot: return "singular-pivot";
    case ErrorCode::SyntaxError: return "syntax-error";
    case ErrorCode::UnknownIdentifier: return "unknown-identifier";
    case ErrorCode::ArityError: return "arity-error";
    case ErrorCode::EvaluationError: return "evaluation-error";
    case ErrorCode::HypothesisViolation: return "hypothesis-violation";
    case ErrorCode::NonpositiveIntegral: return "nonpositive-integral";
    case ErrorCode::NonlinearDivergence: return "nonlinear-divergence";
    case ErrorCode::UnsupportedCoefficient: return "unsupported-coefficient";
    case ErrorCode::UnsupportedDimension: return "unsupported-dimension";
    case ErrorCode::NonIntegerStepCount: return "non-integer-step-count";
    case ErrorCode::BoundaryViolation: return "boundary-violation";
    case ErrorCode::ResidualCheckFailed: return "residual-check-failed";
    case ErrorCode::ConfigError: return "config-error";
    case ErrorCode::IoError: return "io-error";
    }
    return "unknown-error";
}

}  // namespace thermistor
