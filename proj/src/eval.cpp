#include "episodic/eval.hpp"

#include <fstream>
#include <sstream>

#include "episodic/error.hpp"
#include "episodic/text.hpp"
#include "parallel.hpp"

namespace episodic {

std::string_view mode_label(PersonaMode mode) {
  switch (mode) {
    case PersonaMode::kBaseline:
      return "Baseline LLM";
    case PersonaMode::kTraditionalRag:
      return "Traditional RAG";
    case PersonaMode::kAutonoesis:
      return "Augmented RAG (Autonoesis)";
    case PersonaMode::kAutonoesisRankedData:
      return "Augmented RAG (Autonoesis + Ranked + Data)";
  }
  return "";
}

namespace {

std::vector<std::string> present_sections(const std::string& system_text) {
  std::vector<std::string> out;
  for (auto header : {kCharacterHeader, kInstructionsHeader, kScenesHeader, kRawValuesHeader}) {
    if (system_text.find(header) != std::string::npos) out.emplace_back(header);
  }
  return out;
}

void run_cell(ComparisonCell& cell, ComparisonStores stores, LlmProvider& llm, EmbeddingProvider& embed,
              const PersonaProfile& profile, const RetrievalParams& params) {
  const MemoryStore* store = nullptr;
  cell.store = "none";
  if (cell.mode == PersonaMode::kTraditionalRag) {
    store = stores.raw;
    cell.store = "raw";
  } else if (cell.mode != PersonaMode::kBaseline) {
    store = stores.augmented;
    cell.store = "augmented";
  }
  ChatSession session{"eval-" + std::to_string(cell.query_index) + "-" + std::string(mode_name(cell.mode)), profile,
                      cell.mode, params, {}};
  AnswerResult result;
  try {
    result = answer(session, cell.query, store, llm, embed);
  } catch (const Error& e) {
    cell.error = e.to_json();
    return;
  } catch (const std::exception& e) {
    cell.error = Error(ErrorCode::kInvalidArgument, e.what()).to_json();
    return;
  }
  cell.answer = result.text;
  cell.explanation = result.explanation;
  if (result.explanation) cell.retrieval_latency_ms = result.retrieval_latency.count();
  cell.sections = present_sections(result.context.request.system_text);
  cell.context_scene_ids = result.context.scene_ids;
  cell.sizes = result.context.sizes;
}

nlohmann::json sizes_json(const ContextSizes& s) {
  return {{"character", s.character}, {"instructions", s.instructions}, {"scenes", s.scenes},
          {"raw_values", s.raw_values}, {"history", s.history},           {"query", s.query},
          {"total", s.total}};
}

std::string table_cell(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n') {
      out += "<br>";
    } else if (c != '\r') {
      out += c;
    }
  }
  return out;
}

}  // namespace

ComparisonReport run_comparison(std::span<const std::string> queries, ComparisonStores stores, LlmProvider& llm,
                                EmbeddingProvider& embed, const PersonaProfile& profile,
                                const RetrievalParams& params, std::span<const PersonaMode> modes) {
  profile.validate();
  params.validate();
  ComparisonReport report;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (auto mode : modes) {
      ComparisonCell cell;
      cell.query_index = q;
      cell.query = queries[q];
      cell.mode = mode;
      report.rows.push_back(std::move(cell));
    }
  }
  const std::size_t parallel = embed.concurrent() ? llm.max_in_flight() : 1;
  detail::bounded_for(report.rows.size(), parallel,
                      [&](std::size_t i) { run_cell(report.rows[i], stores, llm, embed, profile, params); });
  return report;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "markdown" || name == "markdown-table" || name == "md") return ReportFormat::kMarkdown;
  return std::nullopt;
}

nlohmann::json report_to_json(const ComparisonReport& report, const ReportOptions& options) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : report.rows) {
    nlohmann::json retrieved = nlohmann::json::array();
    if (c.explanation) {
      for (const auto& m : c.explanation->candidates) retrieved.push_back(to_json(m));
    }
    nlohmann::json row = {{"query_index", c.query_index},
                          {"query", c.query},
                          {"mode", mode_name(c.mode)},
                          {"configuration", mode_label(c.mode)},
                          {"store", c.store},
                          {"answer", c.answer},
                          {"error", c.error ? *c.error : nlohmann::json(nullptr)},
                          {"entry_point_id", c.explanation ? nlohmann::json(c.explanation->entry_point_id)
                                                           : nlohmann::json(nullptr)},
                          {"no_entry_point", c.explanation && c.explanation->no_entry_point},
                          {"retrieved", std::move(retrieved)},
                          {"context",
                           {{"sections", c.sections}, {"scene_ids", c.context_scene_ids}, {"sizes", sizes_json(c.sizes)}}}};
    if (options.include_timings) {
      row["retrieval_latency_ms"] = c.retrieval_latency_ms ? nlohmann::json(*c.retrieval_latency_ms) : nlohmann::json(nullptr);
    }
    rows.push_back(std::move(row));
  }
  return {{"rows", std::move(rows)}};
}

std::string emit_report(const ComparisonReport& report, ReportFormat format, const ReportOptions& options) {
  if (format == ReportFormat::kJson) return report_to_json(report, options).dump(2) + "\n";

  std::ostringstream out;
  std::optional<std::size_t> current;
  for (const auto& c : report.rows) {
    if (current != c.query_index) {
      if (current) out << "\n";
      current = c.query_index;
      out << "### \"" << table_cell(c.query) << "\"\n\n";
      out << "| Model configuration | Response |\n";
      out << "| --- | --- |\n";
    }
    std::string response;
    if (c.error) {
      response = "_error: " + (*c.error)["error_code"].get<std::string>() + ": " +
                 (*c.error)["message"].get<std::string>() + "_";
    } else {
      response = c.answer;
    }
    out << "| " << mode_label(c.mode) << " | " << table_cell(response);
    if (options.include_timings && c.retrieval_latency_ms) {
      std::ostringstream ms;
      ms.precision(3);
      ms << std::fixed << *c.retrieval_latency_ms;
      out << " (retrieval " << ms.str() << " ms)";
    }
    out << " |\n";
  }
  return out.str();
}

std::vector<std::string> parse_queries(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    if (!line.empty()) out.emplace_back(line);
    start = end + 1;
  }
  return out;
}

std::vector<std::string> load_queries(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kIoFailure, "cannot open query file " + path.string(), {{"path", path.string()}});
  std::ostringstream text;
  text << file.rdbuf();
  return parse_queries(text.str());
}

}  // namespace episodic
