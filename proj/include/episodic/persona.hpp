#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "episodic/embedding.hpp"
#include "episodic/llm.hpp"
#include "episodic/ranking.hpp"
#include "episodic/store.hpp"

namespace episodic {

inline constexpr std::size_t kMinContextBudget = 256;

struct PersonaProfile {
  std::string name;
  std::string character_description;
  std::string task_instructions;
  std::size_t context_budget = 4096;  // estimate_tokens units

  /// Throws InvalidArgument when the budget is below kMinContextBudget.
  void validate() const;
  bool operator==(const PersonaProfile&) const = default;
};

nlohmann::json to_json(const PersonaProfile& profile);
PersonaProfile profile_from_json(const nlohmann::json& j);
PersonaProfile load_profile(const std::filesystem::path& path);

enum class PersonaMode { kBaseline, kTraditionalRag, kAutonoesis, kAutonoesisRankedData };

inline constexpr PersonaMode kAllModes[] = {PersonaMode::kBaseline, PersonaMode::kTraditionalRag,
                                            PersonaMode::kAutonoesis, PersonaMode::kAutonoesisRankedData};

std::string_view mode_name(PersonaMode mode);
std::optional<PersonaMode> parse_mode(std::string_view name);

/// Retrieval parameters actually used for `mode`: traditional_rag forces
/// cosine-only factors, the autonoesis modes keep the session's.
RetrievalParams effective_params(PersonaMode mode, const RetrievalParams& params);

struct Turn {
  std::string user_text;
  std::string assistant_text;
  std::optional<RetrievalExplanation> explanation;  // none for baseline

  bool operator==(const Turn&) const = default;
};

struct ChatSession {
  std::string id;
  PersonaProfile profile;
  PersonaMode mode = PersonaMode::kBaseline;
  RetrievalParams params;
  std::vector<Turn> history;

  bool operator==(const ChatSession&) const = default;
};

/// ceil(chars / 4), counting bytes.
std::size_t estimate_tokens(std::string_view text);

// Section delimiters in the system text, always in this order.
inline constexpr std::string_view kCharacterHeader = "=== CHARACTER ===";
inline constexpr std::string_view kInstructionsHeader = "=== INSTRUCTIONS ===";
inline constexpr std::string_view kScenesHeader = "=== RETRIEVED SCENES ===";
inline constexpr std::string_view kRawValuesHeader = "=== RAW VALUES ===";

struct ContextSizes {
  std::size_t character = 0;
  std::size_t instructions = 0;
  std::size_t scenes = 0;
  std::size_t raw_values = 0;
  std::size_t history = 0;
  std::size_t query = 0;
  std::size_t total = 0;

  bool operator==(const ContextSizes&) const = default;
};

struct ContextPrompt {
  ChatRequest request;
  std::vector<std::string> scene_ids;  // retrieved scenes kept, by rank
  std::size_t history_turns = 0;       // most recent turns kept
  std::size_t scenes_dropped = 0;
  std::size_t history_dropped = 0;
  ContextSizes sizes;  // estimate_tokens of each section's text
};

/// Builds the prompt. `retrieval` must be present iff mode is not baseline;
/// its scenes are looked up in `store`. Oldest history turns go first when
/// over budget, then the lowest-ranked scenes. Throws BudgetTooSmall.
ContextPrompt construct_context(const PersonaProfile& profile, PersonaMode mode,
                                const RetrievalExplanation* retrieval, const MemoryStore* store,
                                std::span<const Turn> history, std::string_view query);

/// Text of a record as presented in the retrieved-scenes block.
std::string scene_text(const MemoryRecord& record, PersonaMode mode);

struct AnswerResult {
  std::string text;
  std::optional<RetrievalExplanation> explanation;
  ContextPrompt context;
  std::chrono::duration<double, std::milli> retrieval_latency{0};
};

/// Retrieves (unless baseline), builds the context, asks `llm` and appends
/// the turn. The session is untouched when anything throws. `store` is the
/// raw store for traditional_rag and the augmented one for autonoesis modes.
AnswerResult answer(ChatSession& session, std::string_view query_text, const MemoryStore* store, LlmProvider& llm,
                    EmbeddingProvider& embed);

/// Explanation of the most recent grounded turn. Throws NothingToExplain.
const RetrievalExplanation& explain_last(const ChatSession& session);

nlohmann::json to_json(const Turn& turn);
nlohmann::json transcript_to_json(const ChatSession& session);

}  // namespace episodic
