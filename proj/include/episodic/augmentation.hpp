#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "episodic/calendar.hpp"
#include "episodic/embedding.hpp"
#include "episodic/llm.hpp"
#include "episodic/prompts.hpp"
#include "episodic/ranking.hpp"
#include "episodic/record.hpp"
#include "episodic/store.hpp"

namespace episodic {

// Biography text -> movie-script scenes -> expert analysis -> affect
// quantification -> standardized dates and places -> MemoryRecords.

struct BiographySegment {
  std::string id;
  std::string source_text;
  std::int64_t ordinal = 0;

  bool operator==(const BiographySegment&) const = default;
};

/// JSONL corpus, one {"id", "source_text", "ordinal"} object per line.
/// Throws SchemaViolation naming the line.
std::vector<BiographySegment> parse_corpus(std::string_view jsonl, std::string_view source_name = "<corpus>");
std::vector<BiographySegment> load_corpus(const std::filesystem::path& path);

struct Scene {
  std::string id;
  std::string background;
  std::string narrator_intro;
  std::string first_person_voiceover;
  std::vector<std::string> source_segment_ids;

  bool operator==(const Scene&) const = default;
};

struct SceneAnalysis {
  std::vector<std::string> characters;
  std::vector<std::string> dominant_emotions;
  std::string location_text;
  std::string date_text;
  std::string context_summary;
  double relevance_score = 0.0;
  std::string commentary;

  bool operator==(const SceneAnalysis&) const = default;
};

/// Emotion label -> circumplex coordinates. Labels are trimmed and lowercased.
class EmotionLexicon {
 public:
  void set(std::string_view label, Affect affect);
  std::optional<Affect> find(std::string_view label) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, Affect>& entries() const { return entries_; }

 private:
  std::map<std::string, Affect> entries_;
};

std::string normalize_label(std::string_view label);

/// "City, Country" -> coordinates, matched case-insensitively.
class Gazetteer {
 public:
  static const Gazetteer& builtin();
  static Gazetteer from_json(const nlohmann::json& table);
  static Gazetteer load(const std::filesystem::path& path);

  std::optional<GeoPoint> find(std::string_view place) const;
  std::size_t size() const { return places_.size(); }

 private:
  std::map<std::string, GeoPoint> places_;  // lowercased keys
};

/// Scenes for one segment. The first scene takes the segment id; further
/// scenes get "<segment>-2", "<segment>-3", ...
std::vector<Scene> generate_segment_scenes(const BiographySegment& segment, LlmProvider& llm,
                                           const PromptSet& prompts, std::string_view persona_name);

/// All segments in ordinal order. Errors carry the failing segment id.
std::vector<Scene> generate_scenes(std::span<const BiographySegment> segments, LlmProvider& llm,
                                   const PromptSet& prompts, std::string_view persona_name);

SceneAnalysis analyze_scene(const Scene& scene, LlmProvider& llm, const PromptSet& prompts,
                            std::string_view persona_name);

inline constexpr std::size_t kLexiconBatchSize = 32;

/// Rates every (normalized, deduplicated) label. Labels the model leaves out
/// are re-asked; still missing after the retries -> MissingLabel listing them.
EmotionLexicon build_emotion_lexicon(const std::set<std::string>& labels, LlmProvider& llm, const PromptSet& prompts,
                                     std::size_t batch_size = kLexiconBatchSize);

struct SceneAffect {
  double valence = 0.0;
  double arousal = 0.0;
  bool low_confidence = false;  // no emotions to average
};

/// Mean valence/arousal of the scene's labels. Throws UnknownLabel.
SceneAffect scene_affect(const SceneAnalysis& analysis, const EmotionLexicon& lexicon);

struct DateStandardization {
  std::optional<IsoDate> date;  // absent -> unknown
  std::int64_t timestamp = 0;
  Granularity granularity = Granularity::kUnknown;
  bool flagged = false;
};

/// LLM rewrites the text as ISO-8601; unknown or unusable replies come back
/// flagged with granularity unknown (the caller fills in the timestamp).
DateStandardization standardize_date(std::string_view date_text, LlmProvider& llm, const PromptSet& prompts);

struct LocationStandardization {
  std::string canonical;  // "City, Country", empty when unknown
  std::optional<GeoPoint> coordinates;
  bool flagged = false;
};

LocationStandardization standardize_location(std::string_view location_text, LlmProvider& llm,
                                             const PromptSet& prompts, const Gazetteer& gazetteer);

struct PipelineConfig {
  std::string persona_name = "Vincent van Gogh";
  std::size_t k = kDefaultNeighborCount;
  /// Fraction of failed scenes above which the run is a PipelineFailure.
  double max_failure_fraction = 0.10;
  /// Record fields concatenated (blank-line separated) into the embedded text.
  std::vector<std::string> embedding_fields = {"first_person_narrative", "general_context"};
  std::size_t lexicon_batch_size = kLexiconBatchSize;
  PromptSet prompts = PromptSet::builtin();
  Gazetteer gazetteer = Gazetteer::builtin();
  StoreMetadata metadata;
};

struct SceneFailure {
  std::string stage;
  std::string item_id;  // segment id for script failures, scene id otherwise
  nlohmann::json error;
};

struct PipelineResult {
  MemoryStore store;
  /// One entry per record: which stage produced each field, plus flags.
  std::vector<nlohmann::json> provenance;
  std::vector<SceneFailure> failures;
};

/// Embedded text for a record under the configured field list.
std::string embedding_text(const MemoryRecord& record, std::span<const std::string> fields);

/// Runs every stage and ingests the validated records. Throws EmptyCorpus,
/// or PipelineFailure when too many scenes fail.
PipelineResult run_pipeline(std::span<const BiographySegment> segments, LlmProvider& llm, EmbeddingProvider& embed,
                            const PipelineConfig& config = {});

/// Un-augmented store: each segment's source text becomes the narrative of
/// a record with neutral affect, unknown time and place.
MemoryStore ingest_raw(std::span<const BiographySegment> segments, EmbeddingProvider& embed,
                       std::size_t k = kDefaultNeighborCount, StoreMetadata metadata = {});

std::string provenance_to_jsonl(std::span<const nlohmann::json> provenance);

}  // namespace episodic
