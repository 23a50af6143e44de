#include "episodic/error.hpp"

namespace episodic {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBoundViolation: return "BoundViolation";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kBadEmbeddingNorm: return "BadEmbeddingNorm";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kStubExhausted: return "StubExhausted";
    case ErrorCode::kNoJsonFound: return "NoJsonFound";
    case ErrorCode::kEmptyStore: return "EmptyStore";
    case ErrorCode::kNoEntryPoint: return "NoEntryPoint";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kMissingLabel: return "MissingLabel";
    case ErrorCode::kUnparseable: return "Unparseable";
    case ErrorCode::kPipelineFailure: return "PipelineFailure";
    case ErrorCode::kBudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::kNothingToExplain: return "NothingToExplain";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kBusy: return "Busy";
  }
  return "Unknown";
}

nlohmann::json Error::to_json() const {
  return {{"error_code", std::string(error_code_name(code_))}, {"message", what()}, {"details", details_}};
}

}  // namespace episodic
