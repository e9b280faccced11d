#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hdmmd {

enum class ErrorCode {
  DomainError,
  UnsupportedOrder,
  EmptyInput,
  DegenerateBandwidth,
  DimensionMismatch,
  TooFewSamples,
  DegenerateVariance,
  HypothesisViolated,
  MissingSummary,
  SingularMatrix,
  NotPositiveSemiDefinite,
  TooFewValues,
  InvalidArgument,
  ConfigError,
  ParseError,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so the
// CLI can map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Usage, config and input-format problems, as opposed to numeric failures.
  bool is_usage_error() const noexcept {
    return code_ == ErrorCode::ConfigError || code_ == ErrorCode::ParseError ||
           code_ == ErrorCode::InvalidArgument;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateBandwidth: return "DegenerateBandwidth";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::MissingSummary: return "MissingSummary";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NotPositiveSemiDefinite: return "NotPositiveSemiDefinite";
    case ErrorCode::TooFewValues: return "TooFewValues";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace hdmmd
