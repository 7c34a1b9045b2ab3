#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace surveykit {

enum class ErrorCode {
    MissingColumn,
    NonNumericCell,
    TooFewRows,
    DegenerateVariance,
    ZeroMean,
    InvalidSizes,
    InvalidSpec,
    TargetUnreachable,
    ZeroSampleMeanX,
    DegenerateDenominator,
    NonPositiveBase,
    InvalidConfig,
    WeightsNotNormalized,
    SingularSystem,
    ZeroMse,
    TooManySubsets,
    EstimatorError,
    EmptyGrid,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for every failure the library reports. The code
/// identifies the condition; `index` carries the offending row, sample or
/// replicate number when one applies.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message,
          std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code),
          index_(index) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> index_;
};

}  // namespace surveykit
