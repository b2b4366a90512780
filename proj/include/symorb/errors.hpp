#pragma once

#include <stdexcept>
#include <string>

namespace symorb {

/// Failures of the reduced-equation analyses (SR, AE, combined).
class AnalysisError : public std::runtime_error {
 public:
  enum class Kind { AllLeadingZero, NewtonFailure, B2Zero, SingularContinuation, BadInput };
  AnalysisError(Kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline std::string to_string(AnalysisError::Kind k) {
  switch (k) {
    case AnalysisError::Kind::AllLeadingZero: return "AllLeadingZero";
    case AnalysisError::Kind::NewtonFailure: return "NewtonFailure";
    case AnalysisError::Kind::B2Zero: return "B2Zero";
    case AnalysisError::Kind::SingularContinuation: return "SingularContinuation";
    case AnalysisError::Kind::BadInput: return "BadInput";
  }
  return "Unknown";
}

}  // namespace symorb
