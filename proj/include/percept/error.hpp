#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace percept {

enum class ErrorCode {
  kUnknownStatement,
  kEmptyContent,
  kInvalidConfig,
  kInvalidParameter,
  kIo,
  kSchema,
  kEmptyRecord,
  kMixedDoc,
  kInsufficientComparisons,
  kInsufficientOverlap,
  kUndefinedCorrelation,
  kNoPairableValues,
  kDegenerateVariance,
  kTooFewDocuments,
  kDivergence,
  kCatalogMismatch,
  kEmptyText,
  kFormat,
  kRankDeficient,
  kSingularDesign,
  kMissingProfile,
  kMissingDimension,
  kDegenerateGroups,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for every module; `code()` carries the error class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace percept
