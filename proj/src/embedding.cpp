#include "episodic/embedding.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>

#include "episodic/error.hpp"
#include "episodic/text.hpp"
#include "http_client.hpp"

namespace episodic {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// Splits UTF-8 into code point byte ranges. Invalid lead bytes are taken as
// single-byte characters so every input has a defined segmentation.
std::vector<std::string_view> code_points(std::string_view text) {
  std::vector<std::string_view> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    len = std::min(len, text.size() - i);
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace

void normalize_l2(std::vector<float>& values) {
  double sum = 0.0;
  for (float v : values) sum += static_cast<double>(v) * v;
  if (sum <= 0.0) return;
  const double inv = 1.0 / std::sqrt(sum);
  for (float& v : values) v = static_cast<float>(v * inv);
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine of vectors with dimensions " + std::to_string(a.size()) + " and " + std::to_string(b.size()),
                {{"left", a.size()}, {"right", b.size()}});
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

TrigramEmbedder::TrigramEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be positive");
}

EmbeddingVector TrigramEmbedder::embed(std::string_view text) {
  const auto trimmed = trim(text);
  if (trimmed.empty()) throw Error(ErrorCode::kEmptyText, "cannot embed empty text");

  const std::string lowered = ascii_lower(trimmed);
  const auto chars = code_points(lowered);

  std::vector<double> counts(dimension_, 0.0);
  auto add_gram = [&](std::size_t first, std::size_t count) {
    const char* begin = chars[first].data();
    const char* end = chars[first + count - 1].data() + chars[first + count - 1].size();
    counts[fnv1a(std::string_view(begin, static_cast<std::size_t>(end - begin))) % dimension_] += 1.0;
  };
  if (chars.size() < 3) {
    add_gram(0, chars.size());
  } else {
    for (std::size_t i = 0; i + 3 <= chars.size(); ++i) add_gram(i, 3);
  }

  double sum = 0.0;
  for (double c : counts) sum += c * c;
  const double inv = 1.0 / std::sqrt(sum);
  EmbeddingVector out(dimension_);
  for (std::size_t i = 0; i < dimension_; ++i) out[i] = static_cast<float>(counts[i] * inv);
  return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
  if (config_.api_key.empty()) {
    if (const char* key = std::getenv("EPISODIC_EMBED_API_KEY")) config_.api_key = key;
  }
  if (config_.dimension == 0) throw Error(ErrorCode::kInvalidArgument, "remote embedder needs a dimension");
}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) {
  if (trim(text).empty()) throw Error(ErrorCode::kEmptyText, "cannot embed empty text");
  const nlohmann::json body = {{"model", config_.model}, {"input", std::string(text)}};
  const auto response = detail::post_json(config_.endpoint, body, config_.api_key, config_.timeout);

  const auto* values = &response;
  if (response.is_object() && response.contains("data")) {
    const auto& data = response["data"];
    if (!data.is_array() || data.empty() || !data[0].contains("embedding")) {
      throw Error(ErrorCode::kProviderUnavailable, "embedding response lacks data[0].embedding");
    }
    values = &data[0]["embedding"];
  } else if (response.is_object() && response.contains("embedding")) {
    values = &response["embedding"];
  }
  if (!values->is_array()) throw Error(ErrorCode::kProviderUnavailable, "embedding response is not an array");

  EmbeddingVector out;
  out.reserve(values->size());
  for (const auto& v : *values) {
    if (!v.is_number()) throw Error(ErrorCode::kProviderUnavailable, "embedding contains a non-number");
    out.push_back(v.get<float>());
  }
  if (out.size() != config_.dimension) {
    throw Error(ErrorCode::kDimensionMismatch,
                "provider returned dimension " + std::to_string(out.size()) + ", expected " +
                    std::to_string(config_.dimension));
  }
  normalize_l2(out);
  return out;
}

EmbeddingVector MemoizingEmbedder::embed(std::string_view text) {
  const std::string key(text);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto value = inner_->embed(text);
  std::lock_guard lock(mutex_);
  cache_.emplace(key, value);
  return value;
}

}  // namespace episodic
