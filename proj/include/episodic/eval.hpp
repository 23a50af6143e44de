#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "episodic/persona.hpp"

namespace episodic {

// Side-by-side run of a query set across the persona modes.

struct ComparisonStores {
  const MemoryStore* raw = nullptr;        // traditional_rag
  const MemoryStore* augmented = nullptr;  // autonoesis modes
};

struct ComparisonCell {
  std::size_t query_index = 0;
  std::string query;
  PersonaMode mode = PersonaMode::kBaseline;
  std::string store;  // "none", "raw" or "augmented"
  std::string answer;
  std::optional<nlohmann::json> error;  // {error_code, message, details}
  std::optional<RetrievalExplanation> explanation;
  std::vector<std::string> sections;  // headers present in the system text
  std::vector<std::string> context_scene_ids;
  ContextSizes sizes;
  std::optional<double> retrieval_latency_ms;  // set for every grounded cell that retrieved
};

struct ComparisonReport {
  std::vector<ComparisonCell> rows;  // by query, then mode
};

/// Display label of a mode in reports.
std::string_view mode_label(PersonaMode mode);

/// One single-turn session per (query, mode). Cell errors are recorded,
/// never thrown.
ComparisonReport run_comparison(std::span<const std::string> queries, ComparisonStores stores, LlmProvider& llm,
                                EmbeddingProvider& embed, const PersonaProfile& profile,
                                const RetrievalParams& params = {},
                                std::span<const PersonaMode> modes = kAllModes);

enum class ReportFormat { kJson, kMarkdown };

std::optional<ReportFormat> parse_report_format(std::string_view name);

struct ReportOptions {
  /// Latency varies run to run, so it is left out unless asked for.
  bool include_timings = false;
};

nlohmann::json report_to_json(const ComparisonReport& report, const ReportOptions& options = {});
std::string emit_report(const ComparisonReport& report, ReportFormat format, const ReportOptions& options = {});

/// One query per non-blank line.
std::vector<std::string> parse_queries(std::string_view text);
std::vector<std::string> load_queries(const std::filesystem::path& path);

}  // namespace episodic
