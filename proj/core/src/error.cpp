#include "dropreg/error.hpp"

namespace dropreg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::NonMonotoneUpdate: return "NonMonotoneUpdate";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::DegenerateMask: return "DegenerateMask";
    case ErrorCode::NotStandardized: return "NotStandardized";
    case ErrorCode::ScalarUnsupported: return "ScalarUnsupported";
    case ErrorCode::InversionFailed: return "InversionFailed";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::InvalidCombination: return "InvalidCombination";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace dropreg
