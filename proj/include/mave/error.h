// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MAVE_ERROR_H_
#define MAVE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mave {

enum class ErrorCode {
  kUnsupportedSampleRate,
  kMalformedFile,
  kIoFailure,
  kAbsorptionOutOfRange,
  kGeometryError,
  kZeroEnergy,
  kCorpusTooSmall,
  kPlacementFailure,
  kNonColaParams,
  kShapeMismatch,
  kCompressedMaskApplied,
  kMissingOracleReference,
  kMaskShapeMismatch,
  kZeroReference,
  kZeroProjection,
  kTooShort,
  kAllSilent,
  kToolMissing,
  kToolFailure,
  kEmpty,
  kSeriesNonConvergence,
  kSolveFailure,
  kChannelMismatch,
  kInvalidArgument,
  kMissingStage,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and tests) can branch on the contract case, not the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mave

#endif  // MAVE_ERROR_H_
