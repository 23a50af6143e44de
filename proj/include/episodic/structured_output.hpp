#pragma once

#include <functional>
#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

#include "episodic/llm.hpp"

namespace episodic {

/// The fixed reply shapes the augmentation pipeline asks the LLM for.
enum class OutputSchema {
  kScene,           // {"scenes": [{background, narrator_intro, first_person_voiceover}]}; a bare scene or array is accepted
  kSceneAnalysis,   // {characters, dominant_emotions, location_text, date_text, context_summary, relevance_score, commentary}
  kEmotion,         // {valence, arousal}
  kEmotionRatings,  // {label: {valence, arousal}, ...}
  kIsoDate,         // {"date": "YYYY[-MM[-DD]]" | "unknown"}
  kPlace,           // {"place": "City, Country" | "unknown"}
};

std::string_view schema_name(OutputSchema schema);

/// First balanced JSON object or array in `text` that parses. Tolerates
/// prose and code fences around it.
std::optional<nlohmann::json> extract_first_json(std::string_view text);

/// Checks `value` against `schema` (bounds included) and returns it in
/// canonical form. Throws SchemaViolation("path: reason").
nlohmann::json validate_schema(const nlohmann::json& value, OutputSchema schema);

/// extract_first_json + validate_schema. Throws NoJsonFound or SchemaViolation.
nlohmann::json parse_structured(std::string_view text, OutputSchema schema);

inline constexpr int kDefaultReasks = 2;

/// Extra acceptance test applied after schema validation; throw an Error to
/// reject the reply and trigger a re-ask.
using ReplyCheck = std::function<void(const nlohmann::json&)>;

/// Asks `llm`, parsing the reply against `schema`. Malformed replies are
/// re-asked up to `max_reasks` times with a "return only valid JSON"
/// follow-up; the last parse error is rethrown after that. Provider errors
/// propagate immediately.
nlohmann::json complete_structured(LlmProvider& llm, ChatRequest request, OutputSchema schema,
                                   const ReplyCheck& check = {}, int max_reasks = kDefaultReasks);

}  // namespace episodic
