#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "episodic/embedding.hpp"
#include "episodic/record.hpp"
#include "episodic/store.hpp"

namespace episodic {

// Retrieval = entry-point selection by cosine, then re-ranking of the pool
// against the top entry point (the anchor):
//
//   compound = cosine * emotional * spatial * temporal [* relevance]
//
// where each factor is a proximity in [0, 1]: one minus the min-max
// normalized distance to the anchor, taken over the candidate pool.
// Candidates lacking a family's metadata get kMissingMetadataFactor.

enum class Expansion { kFullScan, kGraphOneHop };

std::string_view expansion_name(Expansion e);
std::optional<Expansion> parse_expansion(std::string_view name);

struct FactorToggles {
  bool use_emotional = true;
  bool use_spatial = true;
  bool use_temporal = true;
  /// Adds relevance_score as a fourth multiplicative factor.
  bool use_relevance = false;

  static FactorToggles cosine_only() { return {false, false, false, false}; }
  bool operator==(const FactorToggles&) const = default;
};

struct RetrievalParams {
  std::size_t max_entries = 5;
  double similarity_threshold = 0.2;
  Expansion expansion = Expansion::kFullScan;
  FactorToggles factors;

  /// Throws InvalidArgument when max_entries is 0 or the threshold is outside [0, 1].
  void validate() const;
  bool operator==(const RetrievalParams&) const = default;
};

inline constexpr double kMissingMetadataFactor = 0.5;
inline constexpr double kEarthRadiusKm = 6371.0;

struct RankedMemory {
  std::string record_id;
  double cosine = 0.0;
  double emotional_factor = 1.0;
  double spatial_factor = 1.0;
  double temporal_factor = 1.0;
  double relevance_factor = 1.0;
  double compound_score = 0.0;
  std::size_t rank = 0;

  // Record metadata carried along so explanation consumers never need a
  // second lookup.
  double valence = 0.0;
  double arousal = 0.0;
  double relevance_score = 0.0;
  std::int64_t timestamp = 0;
  Granularity granularity = Granularity::kUnknown;
  std::optional<double> latitude;
  std::optional<double> longitude;

  bool operator==(const RankedMemory&) const = default;
};

struct RetrievalExplanation {
  std::string query_text;
  std::string entry_point_id;  // empty when no entry point met the threshold
  std::vector<std::string> entry_point_ids;
  std::vector<RankedMemory> candidates;  // anchor first, then by compound desc
  RetrievalParams params;
  bool no_entry_point = false;

  bool operator==(const RetrievalExplanation&) const = default;
};

struct ScoredIndex {
  std::size_t index = 0;
  double cosine = 0.0;
};

/// Cosine of `query` against every stored record, in store order.
std::vector<double> score_all(std::span<const float> query, const MemoryStore& store);

/// Records with cosine >= threshold, by descending cosine then ascending id,
/// truncated to max_entries. Throws EmptyStore or NoEntryPoint.
std::vector<ScoredIndex> select_entry_points(std::span<const float> query, const MemoryStore& store,
                                             const RetrievalParams& params);

struct Affect {
  double valence = 0.0;
  double arousal = 0.0;
};

double emotional_distance(Affect a, Affect b);
/// Haversine great-circle distance in km.
double spatial_distance(GeoPoint a, GeoPoint b);
double temporal_distance(std::int64_t a, std::int64_t b);

/// Min-max proximity: 1 - (d - min) / (max - min) over present entries;
/// all-equal present entries give 1; missing entries give 0.5.
/// Throws EmptyList.
std::vector<double> proximity_factors(std::span<const std::optional<double>> distances);

/// Per-candidate raw distances to the anchor, the input to the factor stage.
struct CandidateDistances {
  const MemoryRecord* record = nullptr;
  std::size_t order_key = 0;  // ascending id order; ties break on this
  double cosine = 0.0;
  std::optional<double> emotional;
  std::optional<double> spatial;
  std::optional<double> temporal;
};

CandidateDistances distances_to_anchor(const MemoryRecord& anchor, const MemoryRecord& candidate, double cosine,
                                       const FactorToggles& toggles);

/// Normalizes each enabled family across `candidates`, multiplies, sorts by
/// compound desc (ties: order_key asc) and keeps the best `limit` entries,
/// ranked from `first_rank`.
std::vector<RankedMemory> rank_candidates(std::span<const CandidateDistances> candidates,
                                          const FactorToggles& toggles, std::size_t limit,
                                          std::size_t first_rank = 1);

struct CandidateRecord {
  const MemoryRecord* record = nullptr;
  double cosine = 0.0;
};

/// Full ranking of `candidates` against `anchor`, ranks 1..n. The anchor
/// must not be among the candidates.
std::vector<RankedMemory> compound_rank(const MemoryRecord& anchor, std::span<const CandidateRecord> candidates,
                                        const RetrievalParams& params);

/// Retrieval with an already embedded query.
RetrievalExplanation retrieve_embedded(std::string_view query_text, std::span<const float> query,
                                       const MemoryStore& store, const RetrievalParams& params);

RetrievalExplanation retrieve(std::string_view query_text, const MemoryStore& store, const RetrievalParams& params,
                              EmbeddingProvider& embed);

RankedMemory ranked_from_record(const MemoryRecord& record, double cosine);

nlohmann::json to_json(const RetrievalParams& params);
/// Strict decode; missing keys keep their defaults. Throws InvalidArgument.
RetrievalParams params_from_json(const nlohmann::json& j, RetrievalParams defaults = {});
nlohmann::json to_json(const RankedMemory& m);
RankedMemory ranked_memory_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RetrievalExplanation& e);
RetrievalExplanation explanation_from_json(const nlohmann::json& j);

}  // namespace episodic
