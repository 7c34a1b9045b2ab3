#include "surveykit/error.hpp"

namespace surveykit {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::NonNumericCell: return "NonNumericCell";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::DegenerateVariance: return "DegenerateVariance";
        case ErrorCode::ZeroMean: return "ZeroMean";
        case ErrorCode::InvalidSizes: return "InvalidSizes";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::TargetUnreachable: return "TargetUnreachable";
        case ErrorCode::ZeroSampleMeanX: return "ZeroSampleMeanX";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::NonPositiveBase: return "NonPositiveBase";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::WeightsNotNormalized: return "WeightsNotNormalized";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::ZeroMse: return "ZeroMse";
        case ErrorCode::TooManySubsets: return "TooManySubsets";
        case ErrorCode::EstimatorError: return "EstimatorError";
        case ErrorCode::EmptyGrid: return "EmptyGrid";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace surveykit
