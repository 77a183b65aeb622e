#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dropreg {

enum class ErrorCode {
  InvalidParameter,
  ParseError,
  EmptyDomain,
  NonMonotoneUpdate,
  DepthExceeded,
  DegenerateMask,
  NotStandardized,
  ScalarUnsupported,
  InversionFailed,
  SingularSystem,
  ZeroColumn,
  InvalidCombination,
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. Callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dropreg
