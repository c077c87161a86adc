#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace shapetest {

enum class ErrorCode {
    NonFiniteValue,
    TooFewObservations,
    TiesDetected,
    TauNotBelowMinimum,
    MissingTau,
    UOutOfRange,
    NonPositiveObservation,
    NotConverged,
    ClassMismatch,
    ZeroDensityAtObservation,
    DegenerateF0Spacing,
    InvalidClassTauCombination,
    TooManyFailures,
    AlphaOutOfRange,
    UnknownDistribution,
    BadParameter,
    IoError,
    ParseError,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every domain failure in the library is reported through this type; `code()`
// identifies the contract that was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message,
          std::optional<std::size_t> index = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> index_;
};

}  // namespace shapetest
