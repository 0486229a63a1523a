#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace casimir {

enum class ErrorKind {
  negative_spectrum,
  grid_too_coarse,
  division_by_spectrum,
  quadrature_failure,
  order_unsupported,
  pole_proximity,
  negative_delta,
  sum_not_converged,
  dimension_too_high,
  config_error,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::negative_spectrum: return "NegativeSpectrum";
    case ErrorKind::grid_too_coarse: return "GridTooCoarse";
    case ErrorKind::division_by_spectrum: return "DivisionBySpectrum";
    case ErrorKind::quadrature_failure: return "QuadratureFailure";
    case ErrorKind::order_unsupported: return "OrderUnsupported";
    case ErrorKind::pole_proximity: return "PoleProximity";
    case ErrorKind::negative_delta: return "NegativeDelta";
    case ErrorKind::sum_not_converged: return "SumNotConverged";
    case ErrorKind::dimension_too_high: return "DimensionTooHigh";
    case ErrorKind::config_error: return "ConfigError";
  }
  return "Unknown";
}

/// Numerical or configuration failure raised by the library. `kind()` is
/// stable and is what callers should branch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for configuration problems (exit code 2), false for numerical ones (exit code 3).
  bool is_config() const noexcept { return kind_ == ErrorKind::config_error; }

 private:
  ErrorKind kind_;
};

}  // namespace casimir
