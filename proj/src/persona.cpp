#include "episodic/persona.hpp"

#include <fstream>

#include "episodic/error.hpp"
#include "episodic/text.hpp"

namespace episodic {

void PersonaProfile::validate() const {
  if (context_budget < kMinContextBudget) {
    throw Error(ErrorCode::kInvalidArgument,
                "context_budget must be at least " + std::to_string(kMinContextBudget),
                {{"field", "context_budget"}, {"value", context_budget}});
  }
}

nlohmann::json to_json(const PersonaProfile& profile) {
  return {{"name", profile.name},
          {"character_description", profile.character_description},
          {"task_instructions", profile.task_instructions},
          {"context_budget", profile.context_budget}};
}

PersonaProfile profile_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "persona profile must be a JSON object");
  PersonaProfile p;
  for (const auto& [key, value] : j.items()) {
    if (key == "name" || key == "character_description" || key == "task_instructions") {
      if (!value.is_string()) throw Error(ErrorCode::kInvalidArgument, key + " must be a string", {{"field", key}});
    } else if (key == "context_budget") {
      if (!value.is_number_unsigned()) {
        throw Error(ErrorCode::kInvalidArgument, "context_budget must be a positive integer", {{"field", key}});
      }
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown profile field '" + key + "'", {{"field", key}});
    }
  }
  for (const char* required : {"name", "character_description", "task_instructions"}) {
    if (!j.contains(required)) {
      throw Error(ErrorCode::kInvalidArgument, std::string("profile lacks ") + required, {{"field", required}});
    }
  }
  p.name = j["name"].get<std::string>();
  p.character_description = j["character_description"].get<std::string>();
  p.task_instructions = j["task_instructions"].get<std::string>();
  if (j.contains("context_budget")) p.context_budget = j["context_budget"].get<std::size_t>();
  p.validate();
  return p;
}

PersonaProfile load_profile(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw Error(ErrorCode::kIoFailure, "cannot open profile " + path.string(), {{"path", path.string()}});
  const auto j = nlohmann::json::parse(file, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kInvalidArgument, "profile is not valid JSON: " + path.string());
  return profile_from_json(j);
}

std::string_view mode_name(PersonaMode mode) {
  switch (mode) {
    case PersonaMode::kBaseline:
      return "baseline";
    case PersonaMode::kTraditionalRag:
      return "traditional_rag";
    case PersonaMode::kAutonoesis:
      return "autonoesis";
    case PersonaMode::kAutonoesisRankedData:
      return "autonoesis_ranked_data";
  }
  return "baseline";
}

std::optional<PersonaMode> parse_mode(std::string_view name) {
  for (auto m : kAllModes) {
    if (mode_name(m) == name) return m;
  }
  return std::nullopt;
}

RetrievalParams effective_params(PersonaMode mode, const RetrievalParams& params) {
  RetrievalParams out = params;
  if (mode == PersonaMode::kTraditionalRag) out.factors = FactorToggles::cosine_only();
  return out;
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::string scene_text(const MemoryRecord& record, PersonaMode mode) {
  if (mode == PersonaMode::kTraditionalRag) return record.first_person_narrative;
  std::string out;
  auto add = [&out](std::string_view label, const std::string& value) {
    if (trim(value).empty()) return;
    if (!out.empty()) out += '\n';
    out += label;
    out += value;
  };
  add("Setting: ", record.scene_background);
  add("Memory: ", record.first_person_narrative);
  add("Context: ", record.general_context);
  return out;
}

namespace {

std::string number(double v) { return nlohmann::json(v).dump(); }

struct SceneEntry {
  std::string id;
  std::string body;
  std::string values;
};

std::string join_section(std::string_view header, const std::vector<SceneEntry>& entries, std::size_t count,
                         bool values) {
  std::string out(header);
  out += '\n';
  if (count == 0) return out + "(none)";
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) out += values ? "\n" : "\n\n";
    out += values ? entries[i].values : entries[i].body;
  }
  return out;
}

}  // namespace

ContextPrompt construct_context(const PersonaProfile& profile, PersonaMode mode,
                                const RetrievalExplanation* retrieval, const MemoryStore* store,
                                std::span<const Turn> history, std::string_view query) {
  profile.validate();
  const bool grounded = mode != PersonaMode::kBaseline;
  if (grounded != (retrieval != nullptr)) {
    throw Error(ErrorCode::kInvalidArgument, grounded ? "grounded modes need a retrieval" : "baseline takes no retrieval",
                {{"mode", mode_name(mode)}});
  }
  if (grounded && !retrieval->candidates.empty() && store == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "retrieved scenes need their store", {{"mode", mode_name(mode)}});
  }
  const bool with_values = mode == PersonaMode::kAutonoesisRankedData;

  std::vector<SceneEntry> scenes;
  if (grounded) {
    for (const auto& c : retrieval->candidates) {
      const auto index = store->find(c.record_id);
      if (!index) {
        throw Error(ErrorCode::kNotFound, "retrieved record '" + c.record_id + "' is not in the store",
                    {{"record_id", c.record_id}});
      }
      const std::string tag = "[" + std::to_string(c.rank) + "] " + c.record_id;
      scenes.push_back({c.record_id, tag + "\n" + scene_text(store->record(*index), mode),
                        "- " + tag + ": valence=" + number(c.valence) + ", arousal=" + number(c.arousal) +
                            ", relevance=" + number(c.relevance_score)});
    }
  }

  const std::string character = std::string(kCharacterHeader) + "\nYou are " + profile.name + ".\n" +
                                profile.character_description;
  const std::string instructions = std::string(kInstructionsHeader) + "\n" + profile.task_instructions;
  const std::size_t query_tokens = estimate_tokens(query);
  std::vector<std::size_t> turn_tokens;
  for (const auto& t : history) turn_tokens.push_back(estimate_tokens(t.user_text) + estimate_tokens(t.assistant_text));

  struct Built {
    std::string system;
    std::string scenes;
    std::string values;
  };
  auto build = [&](std::size_t scene_count) {
    Built b;
    b.system = character + "\n\n" + instructions;
    if (grounded) {
      b.scenes = join_section(kScenesHeader, scenes, scene_count, false);
      b.system += "\n\n" + b.scenes;
    }
    if (with_values) {
      b.values = join_section(kRawValuesHeader, scenes, scene_count, true);
      b.system += "\n\n" + b.values;
    }
    return b;
  };
  auto history_cost = [&](std::size_t kept) {
    std::size_t sum = 0;
    for (std::size_t i = history.size() - kept; i < history.size(); ++i) sum += turn_tokens[i];
    return sum;
  };

  const std::size_t budget = profile.context_budget;
  const auto bare = build(0);
  const std::size_t floor_cost = estimate_tokens(bare.system) + query_tokens;
  if (floor_cost > budget) {
    throw Error(ErrorCode::kBudgetTooSmall,
                "character, instructions and query need " + std::to_string(floor_cost) + " tokens, budget is " +
                    std::to_string(budget),
                {{"required", floor_cost}, {"budget", budget}});
  }

  std::size_t scene_count = scenes.size();
  std::size_t kept_turns = history.size();
  Built built = build(scene_count);
  auto cost = [&] { return estimate_tokens(built.system) + history_cost(kept_turns) + query_tokens; };
  while (cost() > budget && kept_turns > 0) --kept_turns;
  while (cost() > budget && scene_count > 0) built = build(--scene_count);

  ContextPrompt out;
  out.request.system_text = built.system;
  for (std::size_t i = history.size() - kept_turns; i < history.size(); ++i) {
    out.request.messages.push_back({Role::kUser, history[i].user_text});
    out.request.messages.push_back({Role::kAssistant, history[i].assistant_text});
  }
  out.request.messages.push_back({Role::kUser, std::string(query)});
  for (std::size_t i = 0; i < scene_count; ++i) out.scene_ids.push_back(scenes[i].id);
  out.history_turns = kept_turns;
  out.history_dropped = history.size() - kept_turns;
  out.scenes_dropped = scenes.size() - scene_count;
  out.sizes.character = estimate_tokens(character);
  out.sizes.instructions = estimate_tokens(instructions);
  out.sizes.scenes = estimate_tokens(built.scenes);
  out.sizes.raw_values = estimate_tokens(built.values);
  out.sizes.history = history_cost(kept_turns);
  out.sizes.query = query_tokens;
  out.sizes.total = cost();
  return out;
}

AnswerResult answer(ChatSession& session, std::string_view query_text, const MemoryStore* store, LlmProvider& llm,
                    EmbeddingProvider& embed) {
  if (trim(query_text).empty()) throw Error(ErrorCode::kEmptyText, "query text is empty");
  AnswerResult result;
  if (session.mode != PersonaMode::kBaseline) {
    if (store == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "mode " + std::string(mode_name(session.mode)) + " needs a store");
    }
    const auto start = std::chrono::steady_clock::now();
    result.explanation = retrieve(query_text, *store, effective_params(session.mode, session.params), embed);
    result.retrieval_latency = std::chrono::steady_clock::now() - start;
  }
  result.context = construct_context(session.profile, session.mode,
                                     result.explanation ? &*result.explanation : nullptr, store, session.history,
                                     query_text);
  result.text = llm.complete(result.context.request);
  session.history.push_back({std::string(query_text), result.text, result.explanation});
  return result;
}

const RetrievalExplanation& explain_last(const ChatSession& session) {
  if (session.history.empty() || !session.history.back().explanation) {
    throw Error(ErrorCode::kNothingToExplain, "session '" + session.id + "' has no grounded turn to explain",
                {{"session_id", session.id}, {"mode", mode_name(session.mode)}});
  }
  return *session.history.back().explanation;
}

nlohmann::json to_json(const Turn& turn) {
  return {{"user", turn.user_text},
          {"assistant", turn.assistant_text},
          {"explanation", turn.explanation ? to_json(*turn.explanation) : nlohmann::json(nullptr)}};
}

nlohmann::json transcript_to_json(const ChatSession& session) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : session.history) turns.push_back(to_json(t));
  return {{"id", session.id},
          {"mode", mode_name(session.mode)},
          {"profile", to_json(session.profile)},
          {"params", to_json(session.params)},
          {"turns", std::move(turns)}};
}

}  // namespace episodic
