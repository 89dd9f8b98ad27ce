#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ovm {

enum class ErrorCode {
  PointTooCloseToCharge,
  TolUnreachable,
  NegativePotential,
  OnDiracString,
  OriginSingular,
  SingularMetric,
  StepTooLarge,
  AmbiguousRegion,
  InvalidSchedule,
  GridTooCoarse,
  NotAdmissible,
  InvalidArgument,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PointTooCloseToCharge: return "PointTooCloseToCharge";
    case ErrorCode::TolUnreachable: return "TolUnreachable";
    case ErrorCode::NegativePotential: return "NegativePotential";
    case ErrorCode::OnDiracString: return "OnDiracString";
    case ErrorCode::OriginSingular: return "OriginSingular";
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::AmbiguousRegion: return "AmbiguousRegion";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NotAdmissible: return "NotAdmissible";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace ovm
