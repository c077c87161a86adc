#include "shapetest/error.hpp"

namespace shapetest {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::TiesDetected: return "TiesDetected";
    case ErrorCode::TauNotBelowMinimum: return "TauNotBelowMinimum";
    case ErrorCode::MissingTau: return "MissingTau";
    case ErrorCode::UOutOfRange: return "UOutOfRange";
    case ErrorCode::NonPositiveObservation: return "NonPositiveObservation";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::ClassMismatch: return "ClassMismatch";
    case ErrorCode::ZeroDensityAtObservation: return "ZeroDensityAtObservation";
    case ErrorCode::DegenerateF0Spacing: return "DegenerateF0Spacing";
    case ErrorCode::InvalidClassTauCombination: return "InvalidClassTauCombination";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::UnknownDistribution: return "UnknownDistribution";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), index_(index)
{
}

}  // namespace shapetest
