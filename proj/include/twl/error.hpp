#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twl {

enum class ErrorCode {
  NegativeProbability,
  NotNormalized,
  SizeMismatch,
  ShapeMismatch,
  InvalidSubset,
  OverlappingSets,
  TableTooLarge,
  InvalidBudget,
  InvalidSampleSet,
  GroundTooSmall,
  GroundTooLarge,
  EmptyResidual,
  GroundMismatch,
  NotATree,
  CoverageGap,
  RunningIntersectionViolation,
  InvalidTD,
  SeparatorTooLarge,
  InconsistentModel,
  InvalidSpec,
  TooLarge,
  InvalidConfig,
  ParseError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeProbability: return "NegativeProbability";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidSubset: return "InvalidSubset";
    case ErrorCode::OverlappingSets: return "OverlappingSets";
    case ErrorCode::TableTooLarge: return "TableTooLarge";
    case ErrorCode::InvalidBudget: return "InvalidBudget";
    case ErrorCode::InvalidSampleSet: return "InvalidSampleSet";
    case ErrorCode::GroundTooSmall: return "GroundTooSmall";
    case ErrorCode::GroundTooLarge: return "GroundTooLarge";
    case ErrorCode::EmptyResidual: return "EmptyResidual";
    case ErrorCode::GroundMismatch: return "GroundMismatch";
    case ErrorCode::NotATree: return "NotATree";
    case ErrorCode::CoverageGap: return "CoverageGap";
    case ErrorCode::RunningIntersectionViolation: return "RunningIntersectionViolation";
    case ErrorCode::InvalidTD: return "InvalidTD";
    case ErrorCode::SeparatorTooLarge: return "SeparatorTooLarge";
    case ErrorCode::InconsistentModel: return "InconsistentModel";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

// Every failure in the library surfaces as this exception; code() tells
// callers which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace twl
