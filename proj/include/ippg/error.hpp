#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ippg {

/// Failure kinds raised across the library. The category decides the CLI
/// exit code: usage errors exit 2, data errors 3, numeric failures 4.
enum class ErrorCode {
  // landmark_geometry
  TooFewFrames,
  // region_extraction
  FrameLandmarkCountMismatch,
  InvalidChannelMode,
  // preprocessing
  InvalidBand,
  SeriesTooShort,
  WindowOutOfBounds,
  // turnip_net
  ShapeMismatch,
  ConstantInput,
  StaleCache,
  NonFiniteGradient,
  CorruptCheckpoint,
  // estimation
  NoPowerInBand,
  MismatchedRates,
  NoPeaksFound,
  TooFewPeaks,
  TooFewIntervals,
  RecordTooShort,
  // baselines_eval
  SentinelInWindow,
  ZeroStd,
  AllRegionsExcluded,
  EmptyInput,
  TooFewPoints,
  SingleSubject,
  // io_cli
  ConfigInvalid,
  EmptyWave,
  BadFormat,
  IoFailure,
  Usage,
};

enum class ErrorCategory { Usage, Data, Numeric };

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace ippg
