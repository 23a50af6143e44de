#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace episodic {

enum class ErrorCode {
  kBoundViolation,
  kMissingField,
  kBadEmbeddingNorm,
  kDimensionMismatch,
  kDuplicateId,
  kIoFailure,
  kSchemaViolation,
  kEmptyText,
  kProviderUnavailable,
  kTimeout,
  kStubExhausted,
  kNoJsonFound,
  kEmptyStore,
  kNoEntryPoint,
  kEmptyList,
  kEmptyCorpus,
  kUnknownLabel,
  kMissingLabel,
  kUnparseable,
  kPipelineFailure,
  kBudgetTooSmall,
  kNothingToExplain,
  kInvalidArgument,
  kNotFound,
  kBusy,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure raised by the library. `details` carries structured context
/// (offending field, line number, violation list) for the service layer.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace episodic
