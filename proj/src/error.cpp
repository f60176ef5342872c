#include "spdefind/error.hpp"

namespace spdefind {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ConfigParse: return "ConfigParse";
        case ErrorCode::MissingTruth: return "MissingTruth";
        case ErrorCode::Io: return "IoError";
        case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
        case ErrorCode::BlowUp: return "BlowUp";
        case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::SingularPrecision: return "SingularPrecision";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::ZeroTruth: return "ZeroTruth";
        case ErrorCode::NegativeVariance: return "NegativeVariance";
    }
    return "Unknown";
}

int exit_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::ConfigParse:
        case ErrorCode::MissingTruth:
            return 2;
        case ErrorCode::Io:
            return 4;
        default:
            return 3;
    }
}

}  // namespace spdefind
