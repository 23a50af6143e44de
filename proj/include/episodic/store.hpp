#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "episodic/record.hpp"

namespace episodic {

inline constexpr std::string_view kStoreSchema = "episodic-memory/1";
inline constexpr std::size_t kDefaultNeighborCount = 8;

struct StoreMetadata {
  std::string created_at;  // ISO-8601 UTC, empty when not recorded
  std::string source;      // corpus name

  bool operator==(const StoreMetadata&) const = default;
};

/// Immutable collection of validated records plus the k-NN embedding graph
/// built at ingest. Records are held in ascending id order; that order is
/// also the tie-break everywhere a ranking needs one.
class MemoryStore {
 public:
  MemoryStore() = default;

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t dimension() const { return dimension_; }
  /// Requested neighbor count; each list holds min(k, size-1) entries.
  std::size_t k() const { return k_; }
  const StoreMetadata& metadata() const { return metadata_; }

  std::span<const MemoryRecord> records() const { return records_; }
  const MemoryRecord& record(std::size_t index) const { return records_[index]; }
  std::optional<std::size_t> find(std::string_view id) const;

  /// Out-neighbors of `index` by descending cosine, ties by ascending id.
  std::span<const std::uint32_t> neighbors(std::size_t index) const;
  std::vector<std::string> neighbor_ids(std::size_t index) const;

  /// Row-major copy of all embeddings (size() x dimension()).
  const float* embedding_row(std::size_t index) const { return matrix_.data() + index * dimension_; }
  double embedding_norm(std::size_t index) const { return norms_[index]; }

  /// Int8 copy of each row, row ~= scale * quantized, for a cheap bounded
  /// similarity prefilter. residual is ||row - scale * quantized||.
  const std::int8_t* quantized_row(std::size_t index) const { return quantized_.data() + index * dimension_; }
  double quantized_scale(std::size_t index) const { return quantized_scale_[index]; }
  double quantized_residual(std::size_t index) const { return quantized_residual_[index]; }

  bool operator==(const MemoryStore& other) const;

 private:
  friend MemoryStore ingest(std::vector<MemoryRecord> records, std::size_t k, std::size_t dimension,
                            StoreMetadata metadata);

  std::vector<MemoryRecord> records_;
  std::vector<float> matrix_;
  std::vector<double> norms_;
  std::vector<std::int8_t> quantized_;
  std::vector<double> quantized_scale_;
  std::vector<double> quantized_residual_;
  std::vector<std::uint32_t> neighbors_;  // size() * neighbor_stride_
  std::size_t neighbor_stride_ = 0;
  std::size_t dimension_ = 0;
  std::size_t k_ = kDefaultNeighborCount;
  StoreMetadata metadata_;
};

/// Validates every record, rejects duplicate ids and mixed dimensions, and
/// builds the exact k-NN graph. `dimension` of 0 takes the first record's
/// dimension; an empty store needs it explicitly. Result is independent of
/// input order.
MemoryStore ingest(std::vector<MemoryRecord> records, std::size_t k = kDefaultNeighborCount,
                   std::size_t dimension = 0, StoreMetadata metadata = {});

/// JSONL: header line then one record per line, in id order.
void save_store(const MemoryStore& store, const std::filesystem::path& path);
std::string serialize_store(const MemoryStore& store);

MemoryStore load_store(const std::filesystem::path& path);
/// Parses the JSONL text; `source_name` only labels error messages.
MemoryStore parse_store(std::string_view text, std::string_view source_name = "<memory>");

/// Cosine between two stored records, computed the same way everywhere the
/// store ranks by embedding similarity.
double stored_cosine(const MemoryStore& store, std::size_t a, std::size_t b);

/// Symmetric int8 quantization of `values` into `out`; returns the scale and
/// sets `residual` to the L2 norm of the rounding error.
double quantize_int8(const float* values, std::size_t n, std::int8_t* out, double& residual);
/// dot product of two float rows accumulated in double.
double dot_f64(const float* a, const float* b, std::size_t n);

}  // namespace episodic
