#include "episodic/structured_output.hpp"

#include <cmath>
#include <vector>

#include "episodic/calendar.hpp"
#include "episodic/error.hpp"
#include "episodic/text.hpp"

namespace episodic {

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& reason) {
  throw Error(ErrorCode::kSchemaViolation, path + ": " + reason, {{"path", path}, {"reason", reason}});
}

// Index one past the bracket closing the one at `open`, or npos.
std::size_t balanced_end(std::string_view text, std::size_t open) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"': in_string = true; break;
      case '{': stack.push_back('}'); break;
      case '[': stack.push_back(']'); break;
      case '}':
      case ']':
        if (stack.empty() || stack.back() != c) return std::string_view::npos;
        stack.pop_back();
        if (stack.empty()) return i + 1;
        break;
      default: break;
    }
  }
  return std::string_view::npos;
}

const nlohmann::json& require(const nlohmann::json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) violation(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string text_field(const nlohmann::json& obj, const std::string& path, const char* key, bool non_empty) {
  const auto& v = require(obj, path, key);
  if (!v.is_string()) violation(join(path, key), "not a string");
  auto s = v.get<std::string>();
  if (non_empty && trim(s).empty()) violation(join(path, key), "must be non-empty");
  return s;
}

double bounded(const nlohmann::json& obj, const std::string& path, const char* key, double lo, double hi) {
  const auto& v = require(obj, path, key);
  if (!v.is_number()) violation(join(path, key), "not a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < lo || x > hi) {
    violation(join(path, key), "out of [" + nlohmann::json(lo).dump() + ", " + nlohmann::json(hi).dump() + "]");
  }
  return x;
}

std::vector<std::string> string_list(const nlohmann::json& obj, const std::string& path, const char* key,
                                     bool entries_non_empty) {
  const auto& v = require(obj, path, key);
  if (!v.is_array()) violation(join(path, key), "not an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string item = join(path, key) + "[" + std::to_string(i) + "]";
    if (!v[i].is_string()) violation(item, "not a string");
    auto s = v[i].get<std::string>();
    if (entries_non_empty && trim(s).empty()) violation(item, "must be non-empty");
    out.push_back(std::move(s));
  }
  return out;
}

void require_object(const nlohmann::json& v, const std::string& path) {
  if (!v.is_object()) violation(path.empty() ? "$" : path, "not an object");
}

nlohmann::json scene_object(const nlohmann::json& v, const std::string& path) {
  require_object(v, path);
  return {{"background", text_field(v, path, "background", false)},
          {"narrator_intro", text_field(v, path, "narrator_intro", false)},
          {"first_person_voiceover", text_field(v, path, "first_person_voiceover", true)}};
}

nlohmann::json validate_scenes(const nlohmann::json& value) {
  const nlohmann::json* list = nullptr;
  std::string path;
  if (value.is_array()) {
    list = &value;
  } else if (value.is_object() && value.contains("scenes")) {
    list = &value["scenes"];
    path = "scenes";
    if (!list->is_array()) violation(path, "not an array");
  } else {
    return {{"scenes", nlohmann::json::array({scene_object(value, "")})}};
  }
  if (list->empty()) violation(path.empty() ? "$" : path, "must contain at least one scene");
  nlohmann::json scenes = nlohmann::json::array();
  for (std::size_t i = 0; i < list->size(); ++i) {
    scenes.push_back(scene_object((*list)[i], (path.empty() ? "" : path) + "[" + std::to_string(i) + "]"));
  }
  return {{"scenes", std::move(scenes)}};
}

nlohmann::json validate_analysis(const nlohmann::json& v) {
  require_object(v, "");
  return {{"characters", string_list(v, "", "characters", true)},
          {"dominant_emotions", string_list(v, "", "dominant_emotions", true)},
          {"location_text", text_field(v, "", "location_text", false)},
          {"date_text", text_field(v, "", "date_text", false)},
          {"context_summary", text_field(v, "", "context_summary", false)},
          {"relevance_score", bounded(v, "", "relevance_score", 0.0, 1.0)},
          {"commentary", text_field(v, "", "commentary", false)}};
}

nlohmann::json validate_emotion(const nlohmann::json& v, const std::string& path) {
  require_object(v, path);
  return {{"valence", bounded(v, path, "valence", -1.0, 1.0)}, {"arousal", bounded(v, path, "arousal", -1.0, 1.0)}};
}

nlohmann::json validate_ratings(const nlohmann::json& v) {
  require_object(v, "");
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [label, pair] : v.items()) {
    const std::string key = ascii_lower(trim(label));
    if (key.empty()) violation("$", "empty emotion label");
    out[key] = validate_emotion(pair, label);
  }
  return out;
}

nlohmann::json validate_date(const nlohmann::json& v) {
  require_object(v, "");
  const std::string raw(trim(text_field(v, "", "date", true)));
  if (ascii_lower(raw) == "unknown") return {{"date", "unknown"}};
  if (!parse_iso_date(raw)) violation("date", "not an ISO-8601 date (YYYY, YYYY-MM or YYYY-MM-DD)");
  return {{"date", raw}};
}

nlohmann::json validate_place(const nlohmann::json& v) {
  require_object(v, "");
  const std::string raw(trim(text_field(v, "", "place", true)));
  if (ascii_lower(raw) == "unknown") return {{"place", "unknown"}};
  if (raw.find(',') == std::string::npos) violation("place", "expected \"City, Country\"");
  return {{"place", raw}};
}

}  // namespace

std::string_view schema_name(OutputSchema schema) {
  switch (schema) {
    case OutputSchema::kScene: return "scene";
    case OutputSchema::kSceneAnalysis: return "scene_analysis";
    case OutputSchema::kEmotion: return "emotion";
    case OutputSchema::kEmotionRatings: return "emotion_ratings";
    case OutputSchema::kIsoDate: return "iso_date";
    case OutputSchema::kPlace: return "place";
  }
  return "unknown";
}

std::optional<nlohmann::json> extract_first_json(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{' && text[i] != '[') continue;
    const auto end = balanced_end(text, i);
    if (end == std::string_view::npos) continue;
    auto parsed = nlohmann::json::parse(text.substr(i, end - i), nullptr, false);
    if (!parsed.is_discarded()) return parsed;
  }
  return std::nullopt;
}

nlohmann::json validate_schema(const nlohmann::json& value, OutputSchema schema) {
  switch (schema) {
    case OutputSchema::kScene: return validate_scenes(value);
    case OutputSchema::kSceneAnalysis: return validate_analysis(value);
    case OutputSchema::kEmotion: return validate_emotion(value, "");
    case OutputSchema::kEmotionRatings: return validate_ratings(value);
    case OutputSchema::kIsoDate: return validate_date(value);
    case OutputSchema::kPlace: return validate_place(value);
  }
  violation("$", "unknown schema");
}

nlohmann::json parse_structured(std::string_view text, OutputSchema schema) {
  auto json = extract_first_json(text);
  if (!json) {
    throw Error(ErrorCode::kNoJsonFound, "no JSON object or array in reply",
                {{"schema", std::string(schema_name(schema))}, {"excerpt", std::string(text.substr(0, 200))}});
  }
  return validate_schema(*json, schema);
}

nlohmann::json complete_structured(LlmProvider& llm, ChatRequest request, OutputSchema schema,
                                   const ReplyCheck& check, int max_reasks) {
  for (int attempt = 0;; ++attempt) {
    const std::string reply = llm.complete(request);
    try {
      auto value = parse_structured(reply, schema);
      if (check) check(value);
      return value;
    } catch (const Error& e) {
      const bool malformed = e.code() == ErrorCode::kNoJsonFound || e.code() == ErrorCode::kSchemaViolation ||
                             e.code() == ErrorCode::kMissingLabel;
      if (!malformed || attempt >= max_reasks) throw;
      request.messages.push_back({Role::kAssistant, reply});
      request.messages.push_back(
          {Role::kUser, std::string("Your reply could not be used (") + e.what() +
                            "). Return only valid JSON in exactly the requested format, with no other text."});
    }
  }
}

}  // namespace episodic
