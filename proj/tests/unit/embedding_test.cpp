#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "episodic/embedding.hpp"
#include "episodic/error.hpp"
#include "support/test_support.hpp"

namespace episodic {
namespace {

std::string random_text(std::mt19937_64& rng) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz ,.'ABCDEF";
  std::uniform_int_distribution<std::size_t> len(1, 60);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  const auto n = len(rng);
  while (s.size() < n) s.push_back(alphabet[pick(rng)]);
  if (s.find_first_not_of(' ') == std::string::npos) s = "x";
  return s;
}

TEST(Trigram, DeterministicAndUnitNorm) {
  TrigramEmbedder a;
  TrigramEmbedder b;
  const auto v = a.embed("arles");
  EXPECT_EQ(v, a.embed("arles"));
  EXPECT_EQ(v, b.embed("arles"));
  EXPECT_EQ(v.size(), 256u);
  EXPECT_NEAR(l2_norm(v), 1.0, 1e-6);
}

TEST(Trigram, EmptyText) {
  TrigramEmbedder e;
  for (const char* text : {"", "   ", "\t\n"}) {
    try {
      e.embed(text);
      FAIL();
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::kEmptyText);
    }
  }
}

TEST(Trigram, SelfSimilarity) {
  std::mt19937_64 rng(3);
  TrigramEmbedder e;
  for (int i = 0; i < 100; ++i) {
    const auto s = random_text(rng);
    EXPECT_NEAR(cosine_similarity(e.embed(s), e.embed(s)), 1.0, 1e-6) << s;
  }
}

TEST(Trigram, CaseAndOuterWhitespaceInsensitive) {
  TrigramEmbedder e;
  EXPECT_EQ(e.embed("  The Yellow House "), e.embed("the yellow house"));
}

// Counts-then-normalize, checked by building the expected vector by hand:
// "abcd" has trigrams "abc" and "bcd".
TEST(Trigram, BucketsFnvHashedTrigrams) {
  auto fnv = [](std::string_view s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return h;
  };
  TrigramEmbedder e(64);
  std::vector<double> expected(64, 0.0);
  expected[fnv("abc") % 64] += 1;
  expected[fnv("bcd") % 64] += 1;
  double norm = 0;
  for (double x : expected) norm += x * x;
  norm = std::sqrt(norm);
  const auto v = e.embed("ABCD");
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(v[i], expected[i] / norm, 1e-7) << i;
}

TEST(Cosine, Examples) {
  const std::vector<float> x{1, 0};
  const std::vector<float> y{0, 1};
  EXPECT_DOUBLE_EQ(cosine_similarity(x, x), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(x, y), 0.0);
  const std::vector<float> a{0.6f, 0.8f};
  const std::vector<float> b{0.8f, 0.6f};
  // 0.6 * 0.8 + 0.8 * 0.6, up to float rounding of the inputs.
  EXPECT_NEAR(cosine_similarity(a, b), 0.48 + 0.48, 1e-7);
}

TEST(Cosine, DimensionMismatchAndZero) {
  const std::vector<float> a{1, 0};
  const std::vector<float> b{1, 0, 0};
  EXPECT_THROW(cosine_similarity(a, b), Error);
  const std::vector<float> z{0, 0};
  EXPECT_EQ(cosine_similarity(a, z), 0.0);
}

TEST(Cosine, SymmetricAndBounded) {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> n(0, 10);
  for (int i = 0; i < 500; ++i) {
    std::vector<float> a(17);
    std::vector<float> b(17);
    for (auto& x : a) x = n(rng);
    for (auto& x : b) x = n(rng);
    const double ab = cosine_similarity(a, b);
    EXPECT_EQ(ab, cosine_similarity(b, a));
    EXPECT_LE(std::fabs(ab), 1.0 + 1e-9);
  }
}

TEST(Memoizing, ReturnsInnerVectors) {
  auto inner = std::make_shared<TrigramEmbedder>();
  MemoizingEmbedder memo(inner);
  EXPECT_EQ(memo.embed("sunflowers"), inner->embed("sunflowers"));
  EXPECT_EQ(memo.embed("sunflowers"), inner->embed("sunflowers"));
  EXPECT_EQ(memo.dimension(), 256u);
}

TEST(Remote, UnreachableEndpoint) {
  RemoteEmbedder e({"http://127.0.0.1:9/v1/embeddings", "m", 8, "key", std::chrono::milliseconds(500)});
  try {
    e.embed("hello");
    FAIL();
  } catch (const Error& err) {
    EXPECT_TRUE(err.code() == ErrorCode::kProviderUnavailable || err.code() == ErrorCode::kTimeout);
  }
}

}  // namespace
}  // namespace episodic
