#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qkdprobe {

enum class ErrorCode {
  Domain,                 // argument outside its mathematical domain
  DegenerateModel,        // detection probabilities not realizable
  DegenerateDenominator,  // overlap radicand <= 0
  Infeasible,             // no mu reaches the target error rate
  SingularLambda,         // sin(lambda) ~ 0, mu unobservable
  OutOfDomain,            // error rate beyond the branch maximum
  LeadingZero,            // cubic with vanishing leading coefficient
  EmptyFeasibleSet,
  NotNormalized,
  TooLarge,
  DegenerateRun,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Domain: return "Domain";
    case ErrorCode::DegenerateModel: return "DegenerateModel";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::SingularLambda: return "SingularLambda";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::LeadingZero: return "LeadingZero";
    case ErrorCode::EmptyFeasibleSet: return "EmptyFeasibleSet";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DegenerateRun: return "DegenerateRun";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qkdprobe
