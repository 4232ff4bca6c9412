#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dsdr {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  EmptyData,
  NonFinite,
  SingularCovariance,
  SingularSystem,
  DegenerateSlicing,
  OracleTooLarge,
  RefinementSingular,
  ZeroDistanceVariance,
  RankDeficient,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyData: return "EmptyData";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::DegenerateSlicing: return "DegenerateSlicing";
    case ErrorKind::OracleTooLarge: return "OracleTooLarge";
    case ErrorKind::RefinementSingular: return "RefinementSingular";
    case ErrorKind::ZeroDistanceVariance: return "ZeroDistanceVariance";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// True for failures caused by the numbers themselves rather than by the
/// caller's configuration. The CLI maps these to exit code 3.
constexpr bool is_numeric_failure(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularCovariance:
    case ErrorKind::SingularSystem:
    case ErrorKind::DegenerateSlicing:
    case ErrorKind::RefinementSingular:
    case ErrorKind::ZeroDistanceVariance:
    case ErrorKind::RankDeficient:
    case ErrorKind::NonFinite:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dsdr
