#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eprtele {

enum class ErrorCode {
  NegativeFrequency,
  InvalidGrid,
  LengthMismatch,
  GridMismatch,
  MassOutsideGrid,
  DegenerateCorrelation,
  InvalidParameter,
  ZeroVector,
  OffGridOutcome,
  ZeroProbabilityOutcome,
  MirrorOffGrid,
  WindowExceedsGrid,
  MissingPumpFrequency,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeFrequency: return "NegativeFrequency";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::MassOutsideGrid: return "MassOutsideGrid";
    case ErrorCode::DegenerateCorrelation: return "DegenerateCorrelation";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::OffGridOutcome: return "OffGridOutcome";
    case ErrorCode::ZeroProbabilityOutcome: return "ZeroProbabilityOutcome";
    case ErrorCode::MirrorOffGrid: return "MirrorOffGrid";
    case ErrorCode::WindowExceedsGrid: return "WindowExceedsGrid";
    case ErrorCode::MissingPumpFrequency: return "MissingPumpFrequency";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace eprtele
