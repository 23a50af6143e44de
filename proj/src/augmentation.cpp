#include "episodic/augmentation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "episodic/error.hpp"
#include "episodic/structured_output.hpp"
#include "episodic/text.hpp"
#include "parallel.hpp"

namespace episodic {

namespace {

[[noreturn]] void corpus_error(std::string_view source, std::size_t line, const std::string& field,
                               const std::string& reason) {
  throw Error(ErrorCode::kSchemaViolation,
              std::string(source) + ":" + std::to_string(line) + ": " + field + ": " + reason,
              {{"line", line}, {"field", field}, {"reason", reason}});
}

ChatRequest role_request(const PromptTemplate& prompt, const std::map<std::string, std::string>& values) {
  ChatRequest request;
  request.system_text = render(prompt.system, values);
  request.messages.push_back({Role::kUser, render(prompt.user, values)});
  request.temperature = 0.0;
  return request;
}

// Rethrows `e` with the failing item's id prefixed and attached.
[[noreturn]] void rethrow_for(const Error& e, const char* key, const std::string& id) {
  auto details = e.details();
  if (!details.is_object()) details = {{"cause", details}};
  details[key] = id;
  throw Error(e.code(), std::string(key) + " '" + id + "': " + e.what(), std::move(details));
}

EmotionLexicon rate_batch(const std::vector<std::string>& labels, LlmProvider& llm, const PromptSet& prompts) {
  const auto request = role_request(prompts.emotion_rater, {{"labels", nlohmann::json(labels).dump()}});
  auto check = [&labels](const nlohmann::json& ratings) {
    std::vector<std::string> missing;
    for (const auto& l : labels) {
      if (!ratings.contains(l)) missing.push_back(l);
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      throw Error(ErrorCode::kMissingLabel, "reply lacks ratings for: " + list, {{"labels", missing}});
    }
  };
  const auto ratings = complete_structured(llm, request, OutputSchema::kEmotionRatings, check);
  EmotionLexicon lexicon;
  for (const auto& l : labels) {
    lexicon.set(l, {ratings[l]["valence"].get<double>(), ratings[l]["arousal"].get<double>()});
  }
  return lexicon;
}

std::vector<std::vector<std::string>> batches_of(const std::set<std::string>& labels, std::size_t batch_size) {
  std::vector<std::vector<std::string>> out;
  for (const auto& l : labels) {
    if (out.empty() || out.back().size() >= std::max<std::size_t>(batch_size, 1)) out.emplace_back();
    out.back().push_back(l);
  }
  return out;
}

const std::string& record_field(const MemoryRecord& r, const std::string& name) {
  if (name == "scene_background") return r.scene_background;
  if (name == "narrator_intro") return r.narrator_intro;
  if (name == "first_person_narrative") return r.first_person_narrative;
  if (name == "general_context") return r.general_context;
  if (name == "expert_commentary") return r.expert_commentary;
  throw Error(ErrorCode::kInvalidArgument, "cannot embed record field '" + name + "'", {{"field", name}});
}

}  // namespace

std::vector<BiographySegment> parse_corpus(std::string_view jsonl, std::string_view source_name) {
  std::vector<BiographySegment> segments;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= jsonl.size()) {
    auto end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    auto line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (trim(line).empty()) {
      if (end == jsonl.size()) break;
      continue;
    }
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) corpus_error(source_name, line_no, "segment", "not a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (key != "id" && key != "source_text" && key != "ordinal") corpus_error(source_name, line_no, key, "unknown field");
    }
    BiographySegment s;
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
      corpus_error(source_name, line_no, "id", "must be a non-empty string");
    }
    if (!j.contains("source_text") || !j["source_text"].is_string() || trim(j["source_text"].get<std::string>()).empty()) {
      corpus_error(source_name, line_no, "source_text", "must be a non-empty string");
    }
    if (!j.contains("ordinal") || !j["ordinal"].is_number_integer()) {
      corpus_error(source_name, line_no, "ordinal", "must be an integer");
    }
    s.id = j["id"].get<std::string>();
    s.source_text = j["source_text"].get<std::string>();
    s.ordinal = j["ordinal"].get<std::int64_t>();
    if (!ids.insert(s.id).second) corpus_error(source_name, line_no, "id", "duplicate segment id '" + s.id + "'");
    segments.push_back(std::move(s));
    if (end == jsonl.size()) break;
  }
  return segments;
}

std::vector<BiographySegment> load_corpus(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kIoFailure, "cannot open corpus " + path.string(), {{"path", path.string()}});
  std::ostringstream text;
  text << file.rdbuf();
  return parse_corpus(text.str(), path.string());
}

std::string normalize_label(std::string_view label) { return ascii_lower(trim(label)); }

void EmotionLexicon::set(std::string_view label, Affect affect) { entries_[normalize_label(label)] = affect; }

std::optional<Affect> EmotionLexicon::find(std::string_view label) const {
  auto it = entries_.find(normalize_label(label));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Gazetteer Gazetteer::from_json(const nlohmann::json& table) {
  if (!table.is_object()) throw Error(ErrorCode::kSchemaViolation, "gazetteer must be an object of place -> [lat, lon]");
  Gazetteer g;
  for (const auto& [place, coords] : table.items()) {
    if (!coords.is_array() || coords.size() != 2 || !coords[0].is_number() || !coords[1].is_number()) {
      throw Error(ErrorCode::kSchemaViolation, "gazetteer entry '" + place + "' must be [lat, lon]", {{"place", place}});
    }
    const GeoPoint p{coords[0].get<double>(), coords[1].get<double>()};
    if (p.latitude < -90 || p.latitude > 90 || p.longitude < -180 || p.longitude > 180) {
      throw Error(ErrorCode::kBoundViolation, "gazetteer entry '" + place + "' is out of range", {{"place", place}});
    }
    g.places_[ascii_lower(trim(place))] = p;
  }
  return g;
}

const Gazetteer& Gazetteer::builtin() {
  static const Gazetteer g = from_json(nlohmann::json::parse(detail::embedded_asset("gazetteer.json")));
  return g;
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw Error(ErrorCode::kIoFailure, "cannot open gazetteer " + path.string());
  const auto table = nlohmann::json::parse(file, nullptr, false);
  if (table.is_discarded()) throw Error(ErrorCode::kSchemaViolation, "gazetteer is not valid JSON: " + path.string());
  return from_json(table);
}

std::optional<GeoPoint> Gazetteer::find(std::string_view place) const {
  auto it = places_.find(ascii_lower(trim(place)));
  if (it == places_.end()) return std::nullopt;
  return it->second;
}

std::vector<Scene> generate_segment_scenes(const BiographySegment& segment, LlmProvider& llm,
                                           const PromptSet& prompts, std::string_view persona_name) {
  const auto request = role_request(prompts.script_writer, {{"persona_name", std::string(persona_name)},
                                                            {"segment_id", segment.id},
                                                            {"segment_text", segment.source_text}});
  nlohmann::json reply;
  try {
    reply = complete_structured(llm, request, OutputSchema::kScene);
  } catch (const Error& e) {
    rethrow_for(e, "segment", segment.id);
  }
  std::vector<Scene> scenes;
  const auto& list = reply["scenes"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    Scene s;
    s.id = i == 0 ? segment.id : segment.id + "-" + std::to_string(i + 1);
    s.background = list[i]["background"].get<std::string>();
    s.narrator_intro = list[i]["narrator_intro"].get<std::string>();
    s.first_person_voiceover = list[i]["first_person_voiceover"].get<std::string>();
    s.source_segment_ids = {segment.id};
    scenes.push_back(std::move(s));
  }
  return scenes;
}

std::vector<Scene> generate_scenes(std::span<const BiographySegment> segments, LlmProvider& llm,
                                   const PromptSet& prompts, std::string_view persona_name) {
  if (segments.empty()) throw Error(ErrorCode::kEmptyCorpus, "no biography segments to augment");
  std::vector<const BiographySegment*> ordered;
  for (const auto& s : segments) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->ordinal < b->ordinal; });
  std::vector<Scene> scenes;
  for (const auto* s : ordered) {
    auto part = generate_segment_scenes(*s, llm, prompts, persona_name);
    scenes.insert(scenes.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return scenes;
}

SceneAnalysis analyze_scene(const Scene& scene, LlmProvider& llm, const PromptSet& prompts,
                            std::string_view persona_name) {
  const auto request = role_request(prompts.expert_analyst, {{"persona_name", std::string(persona_name)},
                                                             {"scene_background", scene.background},
                                                             {"narrator_intro", scene.narrator_intro},
                                                             {"first_person_voiceover", scene.first_person_voiceover}});
  nlohmann::json reply;
  try {
    reply = complete_structured(llm, request, OutputSchema::kSceneAnalysis);
  } catch (const Error& e) {
    rethrow_for(e, "scene", scene.id);
  }
  SceneAnalysis a;
  a.characters = reply["characters"].get<std::vector<std::string>>();
  a.dominant_emotions = reply["dominant_emotions"].get<std::vector<std::string>>();
  a.location_text = reply["location_text"].get<std::string>();
  a.date_text = reply["date_text"].get<std::string>();
  a.context_summary = reply["context_summary"].get<std::string>();
  a.relevance_score = reply["relevance_score"].get<double>();
  a.commentary = reply["commentary"].get<std::string>();
  return a;
}

EmotionLexicon build_emotion_lexicon(const std::set<std::string>& labels, LlmProvider& llm, const PromptSet& prompts,
                                     std::size_t batch_size) {
  std::set<std::string> normalized;
  for (const auto& l : labels) {
    auto n = normalize_label(l);
    if (!n.empty()) normalized.insert(std::move(n));
  }
  if (normalized.empty()) throw Error(ErrorCode::kEmptyList, "no emotion labels to rate");
  EmotionLexicon lexicon;
  for (const auto& batch : batches_of(normalized, batch_size)) {
    const auto part = rate_batch(batch, llm, prompts);
    for (const auto& [label, affect] : part.entries()) lexicon.set(label, affect);
  }
  return lexicon;
}

SceneAffect scene_affect(const SceneAnalysis& analysis, const EmotionLexicon& lexicon) {
  SceneAffect out;
  if (analysis.dominant_emotions.empty()) {
    out.low_confidence = true;
    return out;
  }
  double valence = 0.0;
  double arousal = 0.0;
  for (const auto& label : analysis.dominant_emotions) {
    const auto affect = lexicon.find(label);
    if (!affect) {
      throw Error(ErrorCode::kUnknownLabel, "emotion '" + label + "' is not in the lexicon", {{"label", label}});
    }
    valence += affect->valence;
    arousal += affect->arousal;
  }
  const auto n = static_cast<double>(analysis.dominant_emotions.size());
  out.valence = valence / n;
  out.arousal = arousal / n;
  return out;
}

DateStandardization standardize_date(std::string_view date_text, LlmProvider& llm, const PromptSet& prompts) {
  DateStandardization out;
  out.flagged = true;
  if (trim(date_text).empty()) return out;

  const auto request = role_request(prompts.date_normalizer, {{"date_text", std::string(trim(date_text))}});
  nlohmann::json reply;
  try {
    reply = complete_structured(llm, request, OutputSchema::kIsoDate);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNoJsonFound || e.code() == ErrorCode::kSchemaViolation) return out;
    throw;
  }
  const auto date = parse_iso_date(reply["date"].get<std::string>());
  if (!date) return out;
  out.date = *date;
  out.timestamp = to_unix_seconds(*date);
  out.granularity = date->granularity();
  out.flagged = false;
  return out;
}

LocationStandardization standardize_location(std::string_view location_text, LlmProvider& llm,
                                             const PromptSet& prompts, const Gazetteer& gazetteer) {
  LocationStandardization out;
  if (trim(location_text).empty()) return out;

  out.flagged = true;
  const auto request = role_request(prompts.location_normalizer, {{"location_text", std::string(trim(location_text))}});
  nlohmann::json reply;
  try {
    reply = complete_structured(llm, request, OutputSchema::kPlace);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNoJsonFound || e.code() == ErrorCode::kSchemaViolation) return out;
    throw;
  }
  const auto place = reply["place"].get<std::string>();
  if (place == "unknown") return out;
  out.canonical = place;
  out.coordinates = gazetteer.find(place);
  out.flagged = !out.coordinates.has_value();
  return out;
}

std::string embedding_text(const MemoryRecord& record, std::span<const std::string> fields) {
  std::string text;
  for (const auto& f : fields) {
    const auto& value = record_field(record, f);
    if (trim(value).empty()) continue;
    if (!text.empty()) text += "\n\n";
    text += value;
  }
  return text;
}

PipelineResult run_pipeline(std::span<const BiographySegment> segments, LlmProvider& llm, EmbeddingProvider& embed,
                            const PipelineConfig& config) {
  if (segments.empty()) throw Error(ErrorCode::kEmptyCorpus, "no biography segments to augment");
  const std::size_t parallel = llm.max_in_flight();
  const auto& prompts = config.prompts;
  const std::string& persona = config.persona_name;

  std::vector<const BiographySegment*> ordered;
  for (const auto& s : segments) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->ordinal < b->ordinal; });

  PipelineResult result;
  auto fail = [&result](std::string stage, std::string id, const Error& e) {
    result.failures.push_back({std::move(stage), std::move(id), e.to_json()});
  };

  // Script writing, one prompt per segment.
  std::vector<std::vector<Scene>> per_segment(ordered.size());
  std::vector<std::optional<Error>> segment_errors(ordered.size());
  detail::bounded_for(ordered.size(), parallel, [&](std::size_t i) {
    try {
      per_segment[i] = generate_segment_scenes(*ordered[i], llm, prompts, persona);
    } catch (const Error& e) {
      segment_errors[i] = e;
    }
  });
  std::vector<Scene> scenes;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (segment_errors[i]) fail("script-writer", ordered[i]->id, *segment_errors[i]);
    for (auto& s : per_segment[i]) scenes.push_back(std::move(s));
  }
  const std::size_t attempted = scenes.size() + result.failures.size();

  // Every later stage works on the scenes still alive, in scene order.
  std::vector<bool> alive(scenes.size(), true);
  auto run_stage = [&](const char* stage, auto&& body) {
    std::vector<std::optional<Error>> errors(scenes.size());
    detail::bounded_for(scenes.size(), parallel, [&](std::size_t i) {
      if (!alive[i]) return;
      try {
        body(i);
      } catch (const Error& e) {
        errors[i] = e;
      }
    });
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      if (errors[i]) {
        alive[i] = false;
        fail(stage, scenes[i].id, *errors[i]);
      }
    }
  };

  std::vector<SceneAnalysis> analyses(scenes.size());
  run_stage("expert-analyst", [&](std::size_t i) { analyses[i] = analyze_scene(scenes[i], llm, prompts, persona); });

  std::set<std::string> labels;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (!alive[i]) continue;
    for (const auto& l : analyses[i].dominant_emotions) labels.insert(normalize_label(l));
  }
  EmotionLexicon lexicon;
  const auto label_batches = batches_of(labels, config.lexicon_batch_size);
  std::vector<std::optional<EmotionLexicon>> rated(label_batches.size());
  std::vector<std::optional<Error>> rate_errors(label_batches.size());
  detail::bounded_for(label_batches.size(), parallel, [&](std::size_t b) {
    try {
      rated[b] = rate_batch(label_batches[b], llm, prompts);
    } catch (const Error& e) {
      rate_errors[b] = e;
    }
  });
  for (const auto& part : rated) {
    if (!part) continue;
    for (const auto& [label, affect] : part->entries()) lexicon.set(label, affect);
  }

  std::vector<SceneAffect> affects(scenes.size());
  run_stage("emotion-rater", [&](std::size_t i) { affects[i] = scene_affect(analyses[i], lexicon); });

  std::vector<DateStandardization> dates(scenes.size());
  run_stage("date-normalizer", [&](std::size_t i) { dates[i] = standardize_date(analyses[i].date_text, llm, prompts); });

  std::vector<LocationStandardization> places(scenes.size());
  run_stage("location-normalizer", [&](std::size_t i) {
    places[i] = standardize_location(analyses[i].location_text, llm, prompts, config.gazetteer);
  });

  // Unknown dates sit at the midpoint of the corpus's known span.
  std::optional<std::int64_t> earliest;
  std::optional<std::int64_t> latest;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (!alive[i] || dates[i].granularity == Granularity::kUnknown) continue;
    earliest = std::min(earliest.value_or(dates[i].timestamp), dates[i].timestamp);
    latest = std::max(latest.value_or(dates[i].timestamp), dates[i].timestamp);
  }
  const std::int64_t midpoint = earliest ? *earliest + (*latest - *earliest) / 2 : 0;

  std::vector<MemoryRecord> records;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (!alive[i]) continue;
    const auto& scene = scenes[i];
    const auto& analysis = analyses[i];
    MemoryRecord r;
    r.id = scene.id;
    r.scene_background = scene.background;
    r.narrator_intro = scene.narrator_intro;
    r.first_person_narrative = scene.first_person_voiceover;
    r.general_context = analysis.context_summary;
    r.expert_commentary = analysis.commentary;
    r.characters = analysis.characters;
    std::set<std::string> seen;
    for (const auto& label : analysis.dominant_emotions) {
      const auto key = normalize_label(label);
      if (!seen.insert(key).second) continue;
      const auto affect = *lexicon.find(key);
      r.emotions.push_back({key, affect.valence, affect.arousal});
    }
    r.valence = affects[i].valence;
    r.arousal = affects[i].arousal;
    r.granularity = dates[i].granularity;
    r.timestamp = dates[i].granularity == Granularity::kUnknown ? midpoint : dates[i].timestamp;
    if (places[i].coordinates) {
      r.latitude = places[i].coordinates->latitude;
      r.longitude = places[i].coordinates->longitude;
    }
    r.relevance_score = analysis.relevance_score;

    try {
      r.embedding = embed.embed(embedding_text(r, config.embedding_fields));
      r = validate_record(std::move(r), embed.dimension());
    } catch (const Error& e) {
      fail("embedder", scene.id, e);
      continue;
    }

    nlohmann::json flags = nlohmann::json::array();
    if (affects[i].low_confidence) flags.push_back("low_confidence_affect");
    if (dates[i].flagged) flags.push_back("unknown_date");
    if (places[i].flagged) flags.push_back(places[i].canonical.empty() ? "unknown_location" : "unresolved_place");
    result.provenance.push_back(
        {{"record_id", r.id},
         {"source_segment_ids", scene.source_segment_ids},
         {"fields",
          {{"id", "pipeline"},
           {"scene_background", "script-writer"},
           {"narrator_intro", "script-writer"},
           {"first_person_narrative", "script-writer"},
           {"general_context", "expert-analyst"},
           {"expert_commentary", "expert-analyst"},
           {"characters", "expert-analyst"},
           {"relevance_score", "expert-analyst"},
           {"emotions", "emotion-rater"},
           {"valence", "emotion-rater"},
           {"arousal", "emotion-rater"},
           {"timestamp", "date-normalizer"},
           {"granularity", "date-normalizer"},
           {"latitude", "location-normalizer"},
           {"longitude", "location-normalizer"},
           {"embedding", "embedder"}}},
         {"date_text", analysis.date_text},
         {"date_iso", dates[i].date ? nlohmann::json(dates[i].date->to_string()) : nlohmann::json(nullptr)},
         {"location_text", analysis.location_text},
         {"place", places[i].canonical.empty() ? nlohmann::json(nullptr) : nlohmann::json(places[i].canonical)},
         {"flags", std::move(flags)}});
    records.push_back(std::move(r));
  }

  for (std::size_t b = 0; b < label_batches.size(); ++b) {
    if (rate_errors[b]) fail("emotion-rater", "labels:" + nlohmann::json(label_batches[b]).dump(), *rate_errors[b]);
  }

  const std::size_t failed_scenes = attempted - records.size();
  if (attempted > 0 && static_cast<double>(failed_scenes) > config.max_failure_fraction * static_cast<double>(attempted)) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : result.failures) failures.push_back({{"stage", f.stage}, {"id", f.item_id}, {"error", f.error}});
    throw Error(ErrorCode::kPipelineFailure,
                std::to_string(failed_scenes) + " of " + std::to_string(attempted) + " scenes failed",
                {{"failed", failed_scenes}, {"attempted", attempted}, {"failures", std::move(failures)}});
  }

  result.store = ingest(std::move(records), config.k, embed.dimension(), config.metadata);
  std::sort(result.provenance.begin(), result.provenance.end(),
            [](const nlohmann::json& a, const nlohmann::json& b) { return a["record_id"] < b["record_id"]; });
  return result;
}

MemoryStore ingest_raw(std::span<const BiographySegment> segments, EmbeddingProvider& embed, std::size_t k,
                       StoreMetadata metadata) {
  if (segments.empty()) throw Error(ErrorCode::kEmptyCorpus, "no biography segments to ingest");
  std::vector<MemoryRecord> records;
  records.reserve(segments.size());
  for (const auto& s : segments) {
    MemoryRecord r;
    r.id = s.id;
    r.first_person_narrative = s.source_text;
    r.granularity = Granularity::kUnknown;
    r.embedding = embed.embed(s.source_text);
    records.push_back(std::move(r));
  }
  return ingest(std::move(records), k, embed.dimension(), std::move(metadata));
}

std::string provenance_to_jsonl(std::span<const nlohmann::json> provenance) {
  std::string out;
  for (const auto& p : provenance) {
    out += p.dump();
    out += '\n';
  }
  return out;
}

}  // namespace episodic
