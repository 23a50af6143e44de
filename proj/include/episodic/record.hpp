#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace episodic {

/// Precision of a record's timestamp. Coarse dates are anchored to the
/// first second of the stated period.
enum class Granularity { kDay, kMonth, kYear, kUnknown };

std::string_view granularity_name(Granularity g);
std::optional<Granularity> parse_granularity(std::string_view name);

struct EmotionEntry {
  std::string label;
  double valence = 0.0;
  double arousal = 0.0;

  bool operator==(const EmotionEntry&) const = default;
};

struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

/// One augmented episodic scene.
struct MemoryRecord {
  std::string id;
  std::string scene_background;
  std::string narrator_intro;
  std::string first_person_narrative;
  std::string general_context;
  std::string expert_commentary;
  std::vector<std::string> characters;
  std::vector<EmotionEntry> emotions;
  double valence = 0.0;
  double arousal = 0.0;
  std::int64_t timestamp = 0;
  Granularity granularity = Granularity::kUnknown;
  std::optional<double> latitude;
  std::optional<double> longitude;
  double relevance_score = 0.0;
  std::vector<float> embedding;

  /// Both coordinates, when the record has a place.
  std::optional<GeoPoint> location() const;
  /// The timestamp, unless the granularity is unknown.
  std::optional<std::int64_t> known_timestamp() const;

  bool operator==(const MemoryRecord&) const = default;
};

inline constexpr double kUnitNormTolerance = 1e-6;

double l2_norm(std::span<const float> values);

/// Checks every record invariant and throws one `Error` listing all
/// violations (details.violations). `expected_dimension` of 0 skips the
/// dimension check.
MemoryRecord validate_record(MemoryRecord candidate, std::size_t expected_dimension = 0);

/// Same checks against raw JSON, so missing fields surface as MissingField.
MemoryRecord validate_record(const nlohmann::json& candidate, std::size_t expected_dimension = 0);

nlohmann::json record_to_json(const MemoryRecord& record);

/// Strict decode: every field required, unknown fields rejected.
/// Throws SchemaViolation / MissingField with the offending field name.
MemoryRecord record_from_json(const nlohmann::json& j);

}  // namespace episodic
