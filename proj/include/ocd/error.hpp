#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ocd {

enum class ErrorCode {
  ShapeMismatch,
  DimensionMismatch,
  NonFiniteInput,
  NonFiniteResult,
  NonFiniteState,
  EmptyInput,
  EmptyQuery,
  IndexOutOfRange,
  SingularSystem,
  SingularCovariance,
  DegenerateEnsemble,
  InvalidConfig,
  InvalidGradient,
  SizeGuardExceeded,
  NoFeasibleEpsilon,
  CurveTooShort,
  AllZeroImage,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// I/O and parse failures map to exit status 2, everything else to 1.
  bool is_io() const noexcept { return code_ == ErrorCode::ParseError || code_ == ErrorCode::IoError; }

 private:
  ErrorCode code_;
};

}  // namespace ocd
