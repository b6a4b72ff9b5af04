#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qdm {

enum class ErrorCode {
  InvalidArgument,
  EmptyGrid,
  ChirpDiverged,
  NyquistViolation,
  IncompatibleGrids,
  InsufficientData,
  DegenerateAmplitude,
  SingularDesign,
  SegmentTooLong,
  GridMismatch,
  ZeroReference,
  EmptyBand,
  ZeroTemplate,
  Parse,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code lets callers branch on
/// the failure class without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qdm
