#ifndef LIBLAB_ERROR_HPP
#define LIBLAB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace liblab {

enum class ErrorCode {
  NegativeMass,
  BranchFailure,
  BranchAmbiguity,
  DivergenceDetected,
  TooCloseToSpectrum,
  NewtonDivergence,
  ExitedDisk,
  CharacteristicExit,
  AtomPresent,
  TimeGridMismatch,
};

std::string_view to_string(ErrorCode code);

// Numerical failure raised by the library. `context` carries the offending
// parameters as a compact JSON object so callers can serialize it verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::string context = "{}")
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        context_(std::move(context)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }

 private:
  ErrorCode code_;
  std::string context_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::BranchFailure: return "BranchFailure";
    case ErrorCode::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::TooCloseToSpectrum: return "TooCloseToSpectrum";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::ExitedDisk: return "ExitedDisk";
    case ErrorCode::CharacteristicExit: return "CharacteristicExit";
    case ErrorCode::AtomPresent: return "AtomPresent";
    case ErrorCode::TimeGridMismatch: return "TimeGridMismatch";
  }
  return "Unknown";
}

}  // namespace liblab

#endif  // LIBLAB_ERROR_HPP
