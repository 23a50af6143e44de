#include "episodic/store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "episodic/error.hpp"
#include "episodic/text.hpp"
#include "knn_graph.hpp"

namespace episodic {

double quantize_int8(const float* values, std::size_t n, std::int8_t* out, double& residual) {
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, std::fabs(static_cast<double>(values[i])));
  const double scale = peak > 0.0 ? peak / 127.0 : 1.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = std::clamp(std::nearbyint(values[i] / scale), -127.0, 127.0);
    out[i] = static_cast<std::int8_t>(q);
    const double r = values[i] - scale * q;
    sq += r * r;
  }
  residual = std::sqrt(sq);
  return scale;
}

double dot_f64(const float* a, const float* b, std::size_t n) {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += static_cast<double>(a[i]) * b[i];
    s1 += static_cast<double>(a[i + 1]) * b[i + 1];
    s2 += static_cast<double>(a[i + 2]) * b[i + 2];
    s3 += static_cast<double>(a[i + 3]) * b[i + 3];
  }
  for (; i < n; ++i) s0 += static_cast<double>(a[i]) * b[i];
  return (s0 + s1) + (s2 + s3);
}

std::optional<std::size_t> MemoryStore::find(std::string_view id) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), id,
                             [](const MemoryRecord& r, std::string_view key) { return r.id < key; });
  if (it == records_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - records_.begin());
}

std::span<const std::uint32_t> MemoryStore::neighbors(std::size_t index) const {
  if (neighbor_stride_ == 0) return {};
  return {neighbors_.data() + index * neighbor_stride_, neighbor_stride_};
}

std::vector<std::string> MemoryStore::neighbor_ids(std::size_t index) const {
  std::vector<std::string> ids;
  for (auto n : neighbors(index)) ids.push_back(records_[n].id);
  return ids;
}

bool MemoryStore::operator==(const MemoryStore& other) const {
  return dimension_ == other.dimension_ && k_ == other.k_ && metadata_ == other.metadata_ &&
         records_ == other.records_ && neighbors_ == other.neighbors_;
}

double stored_cosine(const MemoryStore& store, std::size_t a, std::size_t b) {
  return dot_f64(store.embedding_row(a), store.embedding_row(b), store.dimension()) /
         (store.embedding_norm(a) * store.embedding_norm(b));
}

MemoryStore ingest(std::vector<MemoryRecord> records, std::size_t k, std::size_t dimension, StoreMetadata metadata) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "neighbor count k must be at least 1");
  if (dimension == 0) {
    if (records.empty()) throw Error(ErrorCode::kInvalidArgument, "an empty store needs an explicit dimension");
    dimension = records.front().embedding.size();
  }

  std::unordered_set<std::string_view> seen;
  seen.reserve(records.size());
  for (auto& r : records) {
    if (r.embedding.size() != dimension) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "record '" + r.id + "' has dimension " + std::to_string(r.embedding.size()) + ", store has " +
                      std::to_string(dimension),
                  {{"id", r.id}, {"dimension", r.embedding.size()}, {"expected", dimension}});
    }
    validate_record(r, dimension);
    if (!seen.insert(r.id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate record id '" + r.id + "'", {{"id", r.id}});
    }
  }
  std::sort(records.begin(), records.end(), [](const MemoryRecord& a, const MemoryRecord& b) { return a.id < b.id; });

  MemoryStore store;
  store.dimension_ = dimension;
  store.k_ = k;
  store.metadata_ = std::move(metadata);
  store.records_ = std::move(records);

  const std::size_t n = store.records_.size();
  store.matrix_.resize(n * dimension);
  store.norms_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = store.records_[i].embedding;
    std::copy(e.begin(), e.end(), store.matrix_.begin() + static_cast<std::ptrdiff_t>(i * dimension));
    store.norms_[i] = l2_norm(e);
  }
  store.quantized_.resize(n * dimension);
  store.quantized_scale_.resize(n);
  store.quantized_residual_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    store.quantized_scale_[i] = quantize_int8(store.embedding_row(i), dimension, store.quantized_.data() + i * dimension,
                                              store.quantized_residual_[i]);
  }
  store.neighbor_stride_ = n < 2 ? 0 : std::min(k, n - 1);
  store.neighbors_ = detail::build_knn_graph(store.matrix_.data(), store.norms_, n, dimension, k);
  return store;
}

std::string serialize_store(const MemoryStore& store) {
  nlohmann::json header = {{"schema", std::string(kStoreSchema)},
                           {"dimension", store.dimension()},
                           {"k", store.k()}};
  if (!store.metadata().created_at.empty()) header["created_at"] = store.metadata().created_at;
  if (!store.metadata().source.empty()) header["source"] = store.metadata().source;

  std::string out = header.dump();
  out += '\n';
  for (const auto& r : store.records()) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

void save_store(const MemoryStore& store, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string() + " for writing", {{"path", path.string()}});
  file << serialize_store(store);
  file.flush();
  if (!file) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string(), {{"path", path.string()}});
}

namespace {

[[noreturn]] void schema_error(std::string_view source, std::size_t line, const std::string& field,
                               const std::string& reason, nlohmann::json cause = nullptr) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << field << ": " << reason;
  nlohmann::json details = {{"line", line}, {"field", field}};
  if (!cause.is_null()) details["cause"] = std::move(cause);
  throw Error(ErrorCode::kSchemaViolation, msg.str(), std::move(details));
}

}  // namespace

MemoryStore parse_store(std::string_view text, std::string_view source_name) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) schema_error(source_name, 1, "header", "missing header line");

  const auto header = nlohmann::json::parse(lines[0], nullptr, false);
  if (header.is_discarded() || !header.is_object()) schema_error(source_name, 1, "header", "not a JSON object");
  if (!header.contains("schema") || header["schema"] != std::string(kStoreSchema)) {
    schema_error(source_name, 1, "schema", "expected \"" + std::string(kStoreSchema) + "\"");
  }
  for (const char* key : {"dimension", "k"}) {
    if (!header.contains(key) || !header[key].is_number_unsigned() || header[key].get<std::size_t>() == 0) {
      schema_error(source_name, 1, key, "must be a positive integer");
    }
  }
  for (const auto& [key, value] : header.items()) {
    if (key == "schema" || key == "dimension" || key == "k") continue;
    if ((key == "created_at" || key == "source") && value.is_string()) continue;
    schema_error(source_name, 1, key, "unknown or mistyped header field");
  }

  const auto dimension = header["dimension"].get<std::size_t>();
  const auto k = header["k"].get<std::size_t>();
  StoreMetadata metadata{header.value("created_at", std::string()), header.value("source", std::string())};

  std::vector<MemoryRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto j = nlohmann::json::parse(lines[i], nullptr, false);
    if (j.is_discarded()) schema_error(source_name, line_no, "record", "invalid JSON");
    try {
      records.push_back(validate_record(j, dimension));
    } catch (const Error& e) {
      schema_error(source_name, line_no, e.details().value("field", std::string("record")), e.what(), e.to_json());
    }
  }
  return ingest(std::move(records), k, dimension, std::move(metadata));
}

MemoryStore load_store(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string(), {{"path", path.string()}});
  std::ostringstream buffer;
  buffer << file.rdbuf();
  if (file.bad()) throw Error(ErrorCode::kIoFailure, "read failed for " + path.string(), {{"path", path.string()}});
  return parse_store(buffer.str(), path.string());
}

}  // namespace episodic
