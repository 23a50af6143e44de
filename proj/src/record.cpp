#include "episodic/record.hpp"

#include <cmath>
#include <sstream>

#include "episodic/error.hpp"

namespace episodic {

namespace {

struct Violation {
  ErrorCode code;
  std::string field;
  nlohmann::json value;
  std::string reason;
};

class ViolationList {
 public:
  void add(ErrorCode code, std::string field, nlohmann::json value, std::string reason) {
    items_.push_back({code, std::move(field), std::move(value), std::move(reason)});
  }

  void bound(const std::string& field, double value, double lo, double hi) {
    if (!std::isfinite(value) || value < lo || value > hi) {
      std::ostringstream reason;
      reason << "out of [" << lo << ", " << hi << "]";
      add(ErrorCode::kBoundViolation, field, value, reason.str());
    }
  }

  bool empty() const { return items_.empty(); }

  [[noreturn]] void raise(const std::string& record_id) const {
    nlohmann::json list = nlohmann::json::array();
    std::ostringstream message;
    message << "invalid record";
    if (!record_id.empty()) message << " '" << record_id << "'";
    message << ": ";
    for (std::size_t i = 0; i < items_.size(); ++i) {
      const auto& v = items_[i];
      if (i > 0) message << "; ";
      message << error_code_name(v.code) << "(" << v.field;
      if (!v.value.is_null()) message << ", " << v.value.dump();
      message << ") " << v.reason;
      list.push_back({{"code", std::string(error_code_name(v.code))},
                      {"field", v.field},
                      {"value", v.value},
                      {"reason", v.reason}});
    }
    const auto& first = items_.front();
    throw Error(first.code, message.str(),
                {{"field", first.field}, {"value", first.value}, {"violations", std::move(list)}});
  }

 private:
  std::vector<Violation> items_;
};

void check_record(const MemoryRecord& r, std::size_t expected_dimension, ViolationList& out) {
  if (r.id.empty()) out.add(ErrorCode::kMissingField, "id", nullptr, "must be non-empty");
  if (r.first_person_narrative.empty()) {
    out.add(ErrorCode::kMissingField, "first_person_narrative", nullptr, "must be non-empty");
  }
  out.bound("valence", r.valence, -1.0, 1.0);
  out.bound("arousal", r.arousal, -1.0, 1.0);
  out.bound("relevance_score", r.relevance_score, 0.0, 1.0);

  for (std::size_t i = 0; i < r.emotions.size(); ++i) {
    const auto& e = r.emotions[i];
    const std::string prefix = "emotions[" + std::to_string(i) + "]";
    if (e.label.empty()) out.add(ErrorCode::kMissingField, prefix + ".label", nullptr, "must be non-empty");
    out.bound(prefix + ".valence", e.valence, -1.0, 1.0);
    out.bound(prefix + ".arousal", e.arousal, -1.0, 1.0);
  }

  if (r.latitude.has_value() != r.longitude.has_value()) {
    out.add(ErrorCode::kBoundViolation, "coordinates", nullptr, "latitude and longitude must be both present or both absent");
  }
  if (r.latitude) out.bound("latitude", *r.latitude, -90.0, 90.0);
  if (r.longitude) out.bound("longitude", *r.longitude, -180.0, 180.0);

  if (r.embedding.empty()) {
    out.add(ErrorCode::kMissingField, "embedding", nullptr, "must be non-empty");
    return;
  }
  if (expected_dimension != 0 && r.embedding.size() != expected_dimension) {
    out.add(ErrorCode::kDimensionMismatch, "embedding", r.embedding.size(),
            "expected dimension " + std::to_string(expected_dimension));
  }
  bool finite = true;
  for (float v : r.embedding) finite = finite && std::isfinite(v);
  if (!finite) {
    out.add(ErrorCode::kBadEmbeddingNorm, "embedding", nullptr, "non-finite entry");
    return;
  }
  const double norm = l2_norm(r.embedding);
  if (std::abs(norm - 1.0) > kUnitNormTolerance) {
    out.add(ErrorCode::kBadEmbeddingNorm, "embedding", norm, "L2 norm must be 1");
  }
}

constexpr const char* kRecordFields[] = {
    "id",       "scene_background", "narrator_intro", "first_person_narrative", "general_context",
    "expert_commentary", "characters", "emotions", "valence", "arousal", "timestamp", "granularity",
    "latitude", "longitude", "relevance_score", "embedding"};

class Decoder {
 public:
  Decoder(const nlohmann::json& j, ViolationList& out) : j_(j), out_(out) {}

  const nlohmann::json* field(const char* name) {
    auto it = j_.find(name);
    if (it == j_.end()) {
      out_.add(ErrorCode::kMissingField, name, nullptr, "missing");
      return nullptr;
    }
    return &*it;
  }

  void type_error(const std::string& name, const char* expected) {
    out_.add(ErrorCode::kSchemaViolation, name, nullptr, std::string("not ") + expected);
  }

  std::string text(const char* name) {
    const auto* v = field(name);
    if (v == nullptr) return {};
    if (!v->is_string()) {
      type_error(name, "a string");
      return {};
    }
    return v->get<std::string>();
  }

  double number(const char* name) {
    const auto* v = field(name);
    if (v == nullptr) return 0.0;
    if (!v->is_number()) {
      type_error(name, "a number");
      return 0.0;
    }
    return v->get<double>();
  }

  std::optional<double> optional_number(const char* name) {
    const auto* v = field(name);
    if (v == nullptr || v->is_null()) return std::nullopt;
    if (!v->is_number()) {
      type_error(name, "a number or null");
      return std::nullopt;
    }
    return v->get<double>();
  }

 private:
  const nlohmann::json& j_;
  ViolationList& out_;
};

MemoryRecord decode(const nlohmann::json& j, ViolationList& out) {
  MemoryRecord r;
  if (!j.is_object()) {
    out.add(ErrorCode::kSchemaViolation, "record", nullptr, "not a JSON object");
    return r;
  }
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* f : kRecordFields) known = known || key == f;
    if (!known) out.add(ErrorCode::kSchemaViolation, key, nullptr, "unknown field");
  }

  Decoder d(j, out);
  r.id = d.text("id");
  r.scene_background = d.text("scene_background");
  r.narrator_intro = d.text("narrator_intro");
  r.first_person_narrative = d.text("first_person_narrative");
  r.general_context = d.text("general_context");
  r.expert_commentary = d.text("expert_commentary");

  if (const auto* v = d.field("characters")) {
    if (!v->is_array()) {
      d.type_error("characters", "an array");
    } else {
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_string()) {
          d.type_error("characters[" + std::to_string(i) + "]", "a string");
        } else {
          r.characters.push_back((*v)[i].get<std::string>());
        }
      }
    }
  }

  if (const auto* v = d.field("emotions")) {
    if (!v->is_array()) {
      d.type_error("emotions", "an array");
    } else {
      for (std::size_t i = 0; i < v->size(); ++i) {
        const auto& e = (*v)[i];
        const std::string prefix = "emotions[" + std::to_string(i) + "]";
        if (!e.is_object() || !e.contains("label") || !e["label"].is_string() || !e.contains("valence") ||
            !e["valence"].is_number() || !e.contains("arousal") || !e["arousal"].is_number() || e.size() != 3) {
          d.type_error(prefix, "an object {label, valence, arousal}");
          continue;
        }
        r.emotions.push_back({e["label"].get<std::string>(), e["valence"].get<double>(), e["arousal"].get<double>()});
      }
    }
  }

  r.valence = d.number("valence");
  r.arousal = d.number("arousal");
  r.relevance_score = d.number("relevance_score");

  if (const auto* v = d.field("timestamp")) {
    if (!v->is_number_integer()) {
      d.type_error("timestamp", "an integer");
    } else {
      r.timestamp = v->get<std::int64_t>();
    }
  }
  if (const auto* v = d.field("granularity")) {
    std::optional<Granularity> g;
    if (v->is_string()) g = parse_granularity(v->get<std::string>());
    if (!g) {
      d.type_error("granularity", "one of day/month/year/unknown");
    } else {
      r.granularity = *g;
    }
  }

  r.latitude = d.optional_number("latitude");
  r.longitude = d.optional_number("longitude");

  if (const auto* v = d.field("embedding")) {
    if (!v->is_array()) {
      d.type_error("embedding", "an array of numbers");
    } else {
      r.embedding.reserve(v->size());
      for (const auto& x : *v) {
        if (!x.is_number()) {
          d.type_error("embedding", "an array of numbers");
          r.embedding.clear();
          break;
        }
        r.embedding.push_back(x.get<float>());
      }
    }
  }
  return r;
}

}  // namespace

std::string_view granularity_name(Granularity g) {
  switch (g) {
    case Granularity::kDay: return "day";
    case Granularity::kMonth: return "month";
    case Granularity::kYear: return "year";
    case Granularity::kUnknown: return "unknown";
  }
  return "unknown";
}

std::optional<Granularity> parse_granularity(std::string_view name) {
  if (name == "day") return Granularity::kDay;
  if (name == "month") return Granularity::kMonth;
  if (name == "year") return Granularity::kYear;
  if (name == "unknown") return Granularity::kUnknown;
  return std::nullopt;
}

std::optional<GeoPoint> MemoryRecord::location() const {
  if (!latitude || !longitude) return std::nullopt;
  return GeoPoint{*latitude, *longitude};
}

std::optional<std::int64_t> MemoryRecord::known_timestamp() const {
  if (granularity == Granularity::kUnknown) return std::nullopt;
  return timestamp;
}

double l2_norm(std::span<const float> values) {
  double sum = 0.0;
  for (float v : values) sum += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(sum);
}

MemoryRecord validate_record(MemoryRecord candidate, std::size_t expected_dimension) {
  ViolationList violations;
  check_record(candidate, expected_dimension, violations);
  if (!violations.empty()) violations.raise(candidate.id);
  return candidate;
}

MemoryRecord validate_record(const nlohmann::json& candidate, std::size_t expected_dimension) {
  ViolationList violations;
  MemoryRecord r = decode(candidate, violations);
  check_record(r, expected_dimension, violations);
  if (!violations.empty()) violations.raise(r.id);
  return r;
}

nlohmann::json record_to_json(const MemoryRecord& r) {
  nlohmann::json emotions = nlohmann::json::array();
  for (const auto& e : r.emotions) {
    emotions.push_back({{"label", e.label}, {"valence", e.valence}, {"arousal", e.arousal}});
  }
  nlohmann::json j;
  j["id"] = r.id;
  j["scene_background"] = r.scene_background;
  j["narrator_intro"] = r.narrator_intro;
  j["first_person_narrative"] = r.first_person_narrative;
  j["general_context"] = r.general_context;
  j["expert_commentary"] = r.expert_commentary;
  j["characters"] = r.characters;
  j["emotions"] = std::move(emotions);
  j["valence"] = r.valence;
  j["arousal"] = r.arousal;
  j["timestamp"] = r.timestamp;
  j["granularity"] = std::string(granularity_name(r.granularity));
  j["latitude"] = r.latitude ? nlohmann::json(*r.latitude) : nlohmann::json(nullptr);
  j["longitude"] = r.longitude ? nlohmann::json(*r.longitude) : nlohmann::json(nullptr);
  j["relevance_score"] = r.relevance_score;
  j["embedding"] = r.embedding;
  return j;
}

MemoryRecord record_from_json(const nlohmann::json& j) {
  ViolationList violations;
  MemoryRecord r = decode(j, violations);
  if (!violations.empty()) violations.raise(r.id);
  return r;
}

}  // namespace episodic
