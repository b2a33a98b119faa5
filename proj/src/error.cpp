#include "ippg/error.hpp"

namespace ippg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::FrameLandmarkCountMismatch: return "FrameLandmarkCountMismatch";
    case ErrorCode::InvalidChannelMode: return "InvalidChannelMode";
    case ErrorCode::InvalidBand: return "InvalidBand";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::WindowOutOfBounds: return "WindowOutOfBounds";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::NoPowerInBand: return "NoPowerInBand";
    case ErrorCode::MismatchedRates: return "MismatchedRates";
    case ErrorCode::NoPeaksFound: return "NoPeaksFound";
    case ErrorCode::TooFewPeaks: return "TooFewPeaks";
    case ErrorCode::TooFewIntervals: return "TooFewIntervals";
    case ErrorCode::RecordTooShort: return "RecordTooShort";
    case ErrorCode::SentinelInWindow: return "SentinelInWindow";
    case ErrorCode::ZeroStd: return "ZeroStd";
    case ErrorCode::AllRegionsExcluded: return "AllRegionsExcluded";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::SingleSubject: return "SingleSubject";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::EmptyWave: return "EmptyWave";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage:
    case ErrorCode::InvalidChannelMode:
      return ErrorCategory::Usage;
    case ErrorCode::InvalidBand:
    case ErrorCode::ConstantInput:
    case ErrorCode::NonFiniteGradient:
    case ErrorCode::NoPowerInBand:
    case ErrorCode::NoPeaksFound:
    case ErrorCode::ZeroStd:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace ippg
