#include "episodic/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "episodic/error.hpp"

namespace episodic {

std::string_view expansion_name(Expansion e) {
  return e == Expansion::kGraphOneHop ? "graph_1hop" : "full_scan";
}

std::optional<Expansion> parse_expansion(std::string_view name) {
  if (name == "full_scan") return Expansion::kFullScan;
  if (name == "graph_1hop") return Expansion::kGraphOneHop;
  return std::nullopt;
}

void RetrievalParams::validate() const {
  if (max_entries < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_entries must be at least 1", {{"field", "max_entries"}});
  }
  if (!(similarity_threshold >= 0.0 && similarity_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "similarity_threshold must lie in [0, 1]",
                {{"field", "similarity_threshold"}, {"value", similarity_threshold}});
  }
}

std::vector<double> score_all(std::span<const float> query, const MemoryStore& store) {
  const std::size_t d = store.dimension();
  if (query.size() != d) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query has dimension " + std::to_string(query.size()) + ", store has " + std::to_string(d),
                {{"query", query.size()}, {"store", d}});
  }
  const double query_norm = std::sqrt(dot_f64(query.data(), query.data(), d));
  std::vector<double> scores(store.size(), 0.0);
  if (query_norm == 0.0) return scores;
  for (std::size_t i = 0; i < store.size(); ++i) {
    scores[i] = dot_f64(query.data(), store.embedding_row(i), d) / (query_norm * store.embedding_norm(i));
  }
  return scores;
}

namespace {

// Exact cosine for every row that could reach `threshold`, NaN for the rest.
// Each row's int8 dot with the quantized query is widened by a bound on both
// rounding errors, so no row at or above the threshold is ever skipped.
std::vector<double> score_above(std::span<const float> query, const MemoryStore& store, double threshold) {
  const std::size_t d = store.dimension();
  if (query.size() != d) return score_all(query, store);  // raises the mismatch
  std::vector<double> scores(store.size(), std::numeric_limits<double>::quiet_NaN());
  const double query_norm = std::sqrt(dot_f64(query.data(), query.data(), d));
  if (query_norm == 0.0) {
    std::fill(scores.begin(), scores.end(), 0.0);
    return scores;
  }
  std::vector<std::int8_t> q8(d);
  double query_residual = 0.0;
  const double t = quantize_int8(query.data(), d, q8.data(), query_residual);
  double q8_sq = 0.0;
  for (auto v : q8) q8_sq += static_cast<double>(v) * v;
  const double q8_norm = std::sqrt(q8_sq);

  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::int8_t* row = store.quantized_row(i);
    std::int32_t acc = 0;
    for (std::size_t j = 0; j < d; ++j) acc += static_cast<std::int32_t>(row[j]) * q8[j];
    const double s = store.quantized_scale(i);
    const double norm = store.embedding_norm(i);
    const double bound = t * store.quantized_residual(i) * q8_norm + norm * query_residual;
    const double upper = (t * s * acc + bound) / (norm * query_norm) + 1e-9;
    if (upper >= threshold) scores[i] = dot_f64(query.data(), store.embedding_row(i), d) / (query_norm * norm);
  }
  return scores;
}

double stored_query_cosine(std::span<const float> query, const MemoryStore& store, std::size_t i) {
  const std::size_t d = store.dimension();
  const double query_norm = std::sqrt(dot_f64(query.data(), query.data(), d));
  return dot_f64(query.data(), store.embedding_row(i), d) / (query_norm * store.embedding_norm(i));
}

bool before(const ScoredIndex& a, const ScoredIndex& b) {
  if (a.cosine != b.cosine) return a.cosine > b.cosine;
  return a.index < b.index;
}

std::vector<ScoredIndex> entry_points_from_scores(std::span<const double> scores, const RetrievalParams& params) {
  std::vector<ScoredIndex> passing;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= params.similarity_threshold) passing.push_back({i, scores[i]});
  }
  if (passing.empty()) {
    throw Error(ErrorCode::kNoEntryPoint, "no record meets the similarity threshold",
                {{"similarity_threshold", params.similarity_threshold}});
  }
  const std::size_t keep = std::min(params.max_entries, passing.size());
  std::partial_sort(passing.begin(), passing.begin() + static_cast<std::ptrdiff_t>(keep), passing.end(), before);
  passing.resize(keep);
  return passing;
}

double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

}  // namespace

std::vector<ScoredIndex> select_entry_points(std::span<const float> query, const MemoryStore& store,
                                             const RetrievalParams& params) {
  params.validate();
  if (store.empty()) throw Error(ErrorCode::kEmptyStore, "store has no records");
  const auto scores = score_all(query, store);
  return entry_points_from_scores(scores, params);
}

double emotional_distance(Affect a, Affect b) {
  const double dv = a.valence - b.valence;
  const double da = a.arousal - b.arousal;
  return std::sqrt(dv * dv + da * da);
}

double spatial_distance(GeoPoint a, GeoPoint b) {
  const double lat1 = radians(a.latitude);
  const double lat2 = radians(b.latitude);
  const double half_dlat = (lat2 - lat1) / 2.0;
  const double half_dlon = radians(b.longitude - a.longitude) / 2.0;
  const double h = std::sin(half_dlat) * std::sin(half_dlat) +
                   std::cos(lat1) * std::cos(lat2) * std::sin(half_dlon) * std::sin(half_dlon);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::min(1.0, h)));
}

double temporal_distance(std::int64_t a, std::int64_t b) {
  // Computed in double: |a - b| can exceed int64 range only for absurd inputs.
  return std::abs(static_cast<double>(a) - static_cast<double>(b));
}

std::vector<double> proximity_factors(std::span<const std::optional<double>> distances) {
  if (distances.empty()) throw Error(ErrorCode::kEmptyList, "proximity_factors needs at least one distance");
  bool any = false;
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& d : distances) {
    if (!d) continue;
    if (!any) {
      lo = hi = *d;
      any = true;
    } else {
      lo = std::min(lo, *d);
      hi = std::max(hi, *d);
    }
  }
  std::vector<double> factors(distances.size(), kMissingMetadataFactor);
  const double span = hi - lo;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!distances[i]) continue;
    factors[i] = span > 0.0 ? 1.0 - (*distances[i] - lo) / span : 1.0;
  }
  return factors;
}

CandidateDistances distances_to_anchor(const MemoryRecord& anchor, const MemoryRecord& candidate, double cosine,
                                       const FactorToggles& toggles) {
  CandidateDistances out;
  out.record = &candidate;
  out.cosine = cosine;
  if (toggles.use_emotional) {
    out.emotional = emotional_distance({anchor.valence, anchor.arousal}, {candidate.valence, candidate.arousal});
  }
  if (toggles.use_spatial) {
    const auto a = anchor.location();
    const auto b = candidate.location();
    if (a && b) out.spatial = spatial_distance(*a, *b);
  }
  if (toggles.use_temporal) {
    const auto a = anchor.known_timestamp();
    const auto b = candidate.known_timestamp();
    if (a && b) out.temporal = temporal_distance(*a, *b);
  }
  return out;
}

RankedMemory ranked_from_record(const MemoryRecord& record, double cosine) {
  RankedMemory m;
  m.record_id = record.id;
  m.cosine = cosine;
  m.compound_score = cosine;
  m.valence = record.valence;
  m.arousal = record.arousal;
  m.relevance_score = record.relevance_score;
  m.timestamp = record.timestamp;
  m.granularity = record.granularity;
  m.latitude = record.latitude;
  m.longitude = record.longitude;
  return m;
}

std::vector<RankedMemory> rank_candidates(std::span<const CandidateDistances> candidates,
                                          const FactorToggles& toggles, std::size_t limit, std::size_t first_rank) {
  const std::size_t n = candidates.size();
  if (n == 0 || limit == 0) return {};

  auto family = [&](bool enabled, auto member) {
    if (!enabled) return std::vector<double>(n, 1.0);
    std::vector<std::optional<double>> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = candidates[i].*member;
    return proximity_factors(raw);
  };
  const auto emotional = family(toggles.use_emotional, &CandidateDistances::emotional);
  const auto spatial = family(toggles.use_spatial, &CandidateDistances::spatial);
  const auto temporal = family(toggles.use_temporal, &CandidateDistances::temporal);

  struct Entry {
    double compound;
    std::size_t order_key;
    std::size_t position;
  };
  std::vector<Entry> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double relevance = toggles.use_relevance ? candidates[i].record->relevance_score : 1.0;
    entries[i] = {candidates[i].cosine * emotional[i] * spatial[i] * temporal[i] * relevance,
                  candidates[i].order_key, i};
  }
  const std::size_t keep = std::min(limit, n);
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep), entries.end(),
                    [](const Entry& a, const Entry& b) {
                      if (a.compound != b.compound) return a.compound > b.compound;
                      return a.order_key < b.order_key;
                    });

  std::vector<RankedMemory> ranked;
  ranked.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    const auto& e = entries[r];
    const auto& c = candidates[e.position];
    RankedMemory m = ranked_from_record(*c.record, c.cosine);
    m.emotional_factor = emotional[e.position];
    m.spatial_factor = spatial[e.position];
    m.temporal_factor = temporal[e.position];
    m.relevance_factor = toggles.use_relevance ? c.record->relevance_score : 1.0;
    m.compound_score = e.compound;
    m.rank = first_rank + r;
    ranked.push_back(std::move(m));
  }
  return ranked;
}

std::vector<RankedMemory> compound_rank(const MemoryRecord& anchor, std::span<const CandidateRecord> candidates,
                                        const RetrievalParams& params) {
  // Ties break on id; sort the keys once so order_key reflects id order.
  std::vector<std::size_t> by_id(candidates.size());
  for (std::size_t i = 0; i < by_id.size(); ++i) by_id[i] = i;
  std::sort(by_id.begin(), by_id.end(),
            [&](std::size_t a, std::size_t b) { return candidates[a].record->id < candidates[b].record->id; });

  std::vector<CandidateDistances> distances(candidates.size());
  for (std::size_t rank = 0; rank < by_id.size(); ++rank) {
    const auto& c = candidates[by_id[rank]];
    distances[rank] = distances_to_anchor(anchor, *c.record, c.cosine, params.factors);
    distances[rank].order_key = rank;
  }
  return rank_candidates(distances, params.factors, distances.size(), 1);
}

RetrievalExplanation retrieve_embedded(std::string_view query_text, std::span<const float> query,
                                       const MemoryStore& store, const RetrievalParams& params) {
  params.validate();
  if (store.empty()) throw Error(ErrorCode::kEmptyStore, "store has no records");

  RetrievalExplanation out;
  out.query_text = std::string(query_text);
  out.params = params;

  // The 1-hop pool only needs exact scores near the top, so it skips the full
  // double-precision scan.
  auto scores = params.expansion == Expansion::kFullScan ? score_all(query, store)
                                                         : score_above(query, store, params.similarity_threshold);
  std::vector<ScoredIndex> entries;
  try {
    entries = entry_points_from_scores(scores, params);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoEntryPoint) throw;
    out.no_entry_point = true;
    return out;
  }

  const std::size_t anchor = entries.front().index;
  const MemoryRecord& anchor_record = store.record(anchor);
  out.entry_point_id = anchor_record.id;
  for (const auto& e : entries) out.entry_point_ids.push_back(store.record(e.index).id);

  std::vector<std::size_t> pool;
  if (params.expansion == Expansion::kFullScan) {
    pool.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
      if (i != anchor) pool.push_back(i);
    }
  } else {
    for (const auto& e : entries) {
      pool.push_back(e.index);
      for (auto n : store.neighbors(e.index)) pool.push_back(n);
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    pool.erase(std::remove(pool.begin(), pool.end(), anchor), pool.end());
  }

  std::vector<CandidateDistances> distances;
  distances.reserve(pool.size());
  for (auto i : pool) {
    if (std::isnan(scores[i])) scores[i] = stored_query_cosine(query, store, i);
    auto d = distances_to_anchor(anchor_record, store.record(i), scores[i], params.factors);
    d.order_key = i;
    distances.push_back(d);
  }

  out.candidates.reserve(params.max_entries);
  RankedMemory first = ranked_from_record(anchor_record, scores[anchor]);
  first.rank = 1;
  out.candidates.push_back(std::move(first));
  auto rest = rank_candidates(distances, params.factors, params.max_entries - 1, 2);
  for (auto& m : rest) out.candidates.push_back(std::move(m));
  return out;
}

RetrievalExplanation retrieve(std::string_view query_text, const MemoryStore& store, const RetrievalParams& params,
                              EmbeddingProvider& embed) {
  params.validate();
  if (store.empty()) throw Error(ErrorCode::kEmptyStore, "store has no records");
  const auto query = embed.embed(query_text);
  return retrieve_embedded(query_text, query, store, params);
}

nlohmann::json to_json(const RetrievalParams& p) {
  return {{"max_entries", p.max_entries},
          {"similarity_threshold", p.similarity_threshold},
          {"expansion", std::string(expansion_name(p.expansion))},
          {"use_emotional", p.factors.use_emotional},
          {"use_spatial", p.factors.use_spatial},
          {"use_temporal", p.factors.use_temporal},
          {"use_relevance", p.factors.use_relevance}};
}

RetrievalParams params_from_json(const nlohmann::json& j, RetrievalParams p) {
  auto bad = [](const std::string& field, const std::string& reason) {
    throw Error(ErrorCode::kInvalidArgument, "params." + field + ": " + reason, {{"field", field}});
  };
  if (j.is_null()) return p;
  if (!j.is_object()) bad("params", "must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "max_entries") {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 1) bad(key, "must be an integer >= 1");
      p.max_entries = value.get<std::size_t>();
    } else if (key == "similarity_threshold") {
      if (!value.is_number()) bad(key, "must be a number");
      p.similarity_threshold = value.get<double>();
    } else if (key == "expansion") {
      std::optional<Expansion> e;
      if (value.is_string()) e = parse_expansion(value.get<std::string>());
      if (!e) bad(key, "must be \"full_scan\" or \"graph_1hop\"");
      p.expansion = *e;
    } else if (key == "use_emotional" || key == "use_spatial" || key == "use_temporal" || key == "use_relevance") {
      if (!value.is_boolean()) bad(key, "must be a boolean");
      const bool v = value.get<bool>();
      if (key == "use_emotional") p.factors.use_emotional = v;
      if (key == "use_spatial") p.factors.use_spatial = v;
      if (key == "use_temporal") p.factors.use_temporal = v;
      if (key == "use_relevance") p.factors.use_relevance = v;
    } else {
      bad(key, "unknown parameter");
    }
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const RankedMemory& m) {
  return {{"record_id", m.record_id},
          {"rank", m.rank},
          {"cosine", m.cosine},
          {"emotional_factor", m.emotional_factor},
          {"spatial_factor", m.spatial_factor},
          {"temporal_factor", m.temporal_factor},
          {"relevance_factor", m.relevance_factor},
          {"compound_score", m.compound_score},
          {"valence", m.valence},
          {"arousal", m.arousal},
          {"relevance_score", m.relevance_score},
          {"timestamp", m.timestamp},
          {"granularity", std::string(granularity_name(m.granularity))},
          {"latitude", m.latitude ? nlohmann::json(*m.latitude) : nlohmann::json(nullptr)},
          {"longitude", m.longitude ? nlohmann::json(*m.longitude) : nlohmann::json(nullptr)}};
}

RankedMemory ranked_memory_from_json(const nlohmann::json& j) {
  RankedMemory m;
  m.record_id = j.at("record_id").get<std::string>();
  m.rank = j.at("rank").get<std::size_t>();
  m.cosine = j.at("cosine").get<double>();
  m.emotional_factor = j.at("emotional_factor").get<double>();
  m.spatial_factor = j.at("spatial_factor").get<double>();
  m.temporal_factor = j.at("temporal_factor").get<double>();
  m.relevance_factor = j.at("relevance_factor").get<double>();
  m.compound_score = j.at("compound_score").get<double>();
  m.valence = j.at("valence").get<double>();
  m.arousal = j.at("arousal").get<double>();
  m.relevance_score = j.at("relevance_score").get<double>();
  m.timestamp = j.at("timestamp").get<std::int64_t>();
  m.granularity = parse_granularity(j.at("granularity").get<std::string>()).value_or(Granularity::kUnknown);
  if (!j.at("latitude").is_null()) m.latitude = j["latitude"].get<double>();
  if (!j.at("longitude").is_null()) m.longitude = j["longitude"].get<double>();
  return m;
}

nlohmann::json to_json(const RetrievalExplanation& e) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& c : e.candidates) candidates.push_back(to_json(c));
  return {{"query_text", e.query_text},
          {"entry_point_id", e.entry_point_id.empty() ? nlohmann::json(nullptr) : nlohmann::json(e.entry_point_id)},
          {"entry_point_ids", e.entry_point_ids},
          {"no_entry_point", e.no_entry_point},
          {"params", to_json(e.params)},
          {"candidates", std::move(candidates)}};
}

RetrievalExplanation explanation_from_json(const nlohmann::json& j) {
  RetrievalExplanation e;
  e.query_text = j.at("query_text").get<std::string>();
  if (!j.at("entry_point_id").is_null()) e.entry_point_id = j["entry_point_id"].get<std::string>();
  e.entry_point_ids = j.at("entry_point_ids").get<std::vector<std::string>>();
  e.no_entry_point = j.at("no_entry_point").get<bool>();
  e.params = params_from_json(j.at("params"));
  for (const auto& c : j.at("candidates")) e.candidates.push_back(ranked_memory_from_json(c));
  return e;
}

}  // namespace episodic
