#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace episodic {

using EmbeddingVector = std::vector<float>;

/// Text -> unit-norm vector. Implementations must be deterministic per text.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dimension() const = 0;
  /// Throws EmptyText when `text` is blank after trimming.
  virtual EmbeddingVector embed(std::string_view text) = 0;
  /// False when calls must be serialized by the caller.
  virtual bool concurrent() const { return true; }
  virtual std::string name() const = 0;
};

/// Offline fallback: character trigrams of the lowercased, trimmed text are
/// hashed (FNV-1a over their UTF-8 bytes) into `dimension` count buckets,
/// then L2-normalized. Texts shorter than three characters hash as a single
/// gram. Pure function of its input.
class TrigramEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit TrigramEmbedder(std::size_t dimension = kDefaultDimension);

  std::size_t dimension() const override { return dimension_; }
  EmbeddingVector embed(std::string_view text) override;
  std::string name() const override { return "trigram"; }

 private:
  std::size_t dimension_;
};

struct RemoteEmbedderConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1/embeddings
  std::string model;
  std::size_t dimension = 0;
  std::string api_key;  // defaults to $EPISODIC_EMBED_API_KEY
  std::chrono::milliseconds timeout{std::chrono::seconds(60)};
};

/// OpenAI-compatible embeddings endpoint; see docs/wire-formats.md.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig config);

  std::size_t dimension() const override { return config_.dimension; }
  EmbeddingVector embed(std::string_view text) override;
  std::string name() const override { return "remote:" + config_.model; }

 private:
  RemoteEmbedderConfig config_;
};

/// In-memory memoization over another provider.
class MemoizingEmbedder final : public EmbeddingProvider {
 public:
  explicit MemoizingEmbedder(std::shared_ptr<EmbeddingProvider> inner) : inner_(std::move(inner)) {}

  std::size_t dimension() const override { return inner_->dimension(); }
  EmbeddingVector embed(std::string_view text) override;
  bool concurrent() const override { return inner_->concurrent(); }
  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  std::mutex mutex_;
  std::unordered_map<std::string, EmbeddingVector> cache_;
};

/// dot(a, b) / (|a| |b|), accumulated in double. Throws DimensionMismatch.
/// Zero vectors have similarity 0.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

/// Scales `values` to unit L2 norm in place (computed in double).
void normalize_l2(std::vector<float>& values);

}  // namespace episodic
