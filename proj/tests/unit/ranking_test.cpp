#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "episodic/error.hpp"
#include "episodic/ranking.hpp"
#include "oracles/geo_calendar_oracle.hpp"
#include "oracles/ranking_oracle.hpp"
#include "support/test_support.hpp"

namespace episodic {
namespace {

using testing::random_records;
using testing::random_unit;

std::map<std::string, std::vector<std::string>> graph_of(const MemoryStore& store) {
  std::map<std::string, std::vector<std::string>> g;
  for (std::size_t i = 0; i < store.size(); ++i) g[store.record(i).id] = store.neighbor_ids(i);
  return g;
}

TEST(Distances, Emotional) {
  EXPECT_EQ(emotional_distance({0.5, 0.5}, {0.5, 0.5}), 0.0);
  EXPECT_DOUBLE_EQ(emotional_distance({1, 0}, {0, 0}), 1.0);
  EXPECT_NEAR(emotional_distance({-1, -1}, {1, 1}), std::sqrt(4.0 + 4.0), 1e-12);
  EXPECT_NEAR(emotional_distance({-1, -1}, {1, 1}), 2.8284271, 1e-7);
}

TEST(Distances, Spatial) {
  EXPECT_EQ(spatial_distance({48.8566, 2.3522}, {48.8566, 2.3522}), 0.0);
  EXPECT_NEAR(spatial_distance({0, 0}, {0, 180}), M_PI * 6371.0, 1e-6);
  EXPECT_NEAR(spatial_distance({0, 0}, {0, 180}), 20015.087, 1e-3);
  const double want = oracle::haversine_km(48.8566, 2.3522, 43.6766, 4.6278);
  EXPECT_NEAR(spatial_distance({48.8566, 2.3522}, {43.6766, 4.6278}) / want, 1.0, 1e-6);
}

TEST(Distances, Temporal) {
  EXPECT_EQ(temporal_distance(5, 5), 0.0);
  EXPECT_EQ(temporal_distance(1000, 1000 + 86400), 86400.0);
  EXPECT_EQ(temporal_distance(-2556835200, -2587680000), double(-2556835200LL - -2587680000LL));
  EXPECT_EQ(temporal_distance(-2556835200, -2587680000), 30844800.0);
}

TEST(Proximity, Examples) {
  auto run = [](std::vector<std::optional<double>> d) { return proximity_factors(d); };
  EXPECT_EQ(run({2.0, 2.0, 2.0}), (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(run({0.0, 5.0, 10.0}), (std::vector<double>{1.0, 0.5, 0.0}));
  EXPECT_EQ(run({7.0}), (std::vector<double>{1.0}));
  EXPECT_EQ(run({std::nullopt, 3.0, 1.0}), (std::vector<double>{0.5, 0.0, 1.0}));
  EXPECT_EQ(run({std::nullopt}), (std::vector<double>{0.5}));
  EXPECT_THROW(run({}), Error);
}

TEST(CompoundRank, SingletonIsCosine) {
  std::mt19937_64 rng(1);
  auto records = random_records(rng, 2, 8);
  CandidateRecord c{&records[1], 0.37};
  auto ranked = compound_rank(records[0], std::span(&c, 1), {});
  ASSERT_EQ(ranked.size(), 1u);
  EXPECT_EQ(ranked[0].emotional_factor, 1.0);
  EXPECT_EQ(ranked[0].compound_score, 0.37);
  EXPECT_EQ(ranked[0].rank, 1u);
}

// Three candidates built so that the middle one ends with factors
// (0.5, 1.0, 0.5) and cosine 0.8: compound 0.2.
TEST(CompoundRank, ProductOfFactors) {
  auto make = [](std::string id, double valence, std::int64_t t) {
    MemoryRecord r;
    r.id = std::move(id);
    r.first_person_narrative = "x";
    r.valence = valence;
    r.timestamp = t;
    r.granularity = Granularity::kDay;
    r.latitude = 10;
    r.longitude = 10;
    r.embedding = {1.0f};
    return r;
  };
  auto anchor = make("anchor", 0.0, 0);
  std::vector<MemoryRecord> c{make("a", 0.0, 0), make("b", 0.5, 50), make("c", 1.0, 100)};
  std::vector<CandidateRecord> cand{{&c[0], 0.1}, {&c[1], 0.8}, {&c[2], 0.9}};
  auto ranked = compound_rank(anchor, cand, {});
  auto b = std::find_if(ranked.begin(), ranked.end(), [](const RankedMemory& m) { return m.record_id == "b"; });
  ASSERT_NE(b, ranked.end());
  EXPECT_DOUBLE_EQ(b->emotional_factor, 0.5);
  EXPECT_DOUBLE_EQ(b->spatial_factor, 1.0);
  EXPECT_DOUBLE_EQ(b->temporal_factor, 0.5);
  EXPECT_NEAR(b->compound_score, 0.8 * 0.5 * 1.0 * 0.5, 1e-15);
  EXPECT_NEAR(b->compound_score, 0.2, 1e-12);
  EXPECT_EQ(ranked[0].record_id, "b");
  for (std::size_t i = 0; i < ranked.size(); ++i) EXPECT_EQ(ranked[i].rank, i + 1);
}

TEST(CompoundRank, TogglesOffIsCosineOrder) {
  std::mt19937_64 rng(2);
  auto records = random_records(rng, 40, 8);
  std::vector<CandidateRecord> cand;
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t i = 1; i < records.size(); ++i) cand.push_back({&records[i], std::round(u(rng) * 10) / 10});
  RetrievalParams p;
  p.factors = FactorToggles::cosine_only();
  auto ranked = compound_rank(records[0], cand, p);
  auto sorted = cand;
  std::sort(sorted.begin(), sorted.end(), [](const CandidateRecord& a, const CandidateRecord& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.record->id < b.record->id;
  });
  ASSERT_EQ(ranked.size(), sorted.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    EXPECT_EQ(ranked[i].record_id, sorted[i].record->id);
    EXPECT_EQ(ranked[i].compound_score, sorted[i].cosine);
  }
}

TEST(EntryPoints, ExactMatchIsAnchor) {
  std::mt19937_64 rng(3);
  auto store = ingest(random_records(rng, 50, 16));
  RetrievalParams p;
  p.similarity_threshold = 0.5;
  auto e = select_entry_points(store.record(17).embedding, store, p);
  EXPECT_EQ(e.front().index, 17u);
}

TEST(EntryPoints, ThresholdAndEmpty) {
  std::mt19937_64 rng(4);
  auto store = ingest(random_records(rng, 50, 64));
  RetrievalParams p;
  p.similarity_threshold = 0.9;
  const auto q = random_unit(rng, 64);
  try {
    select_entry_points(q, store, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoEntryPoint);
  }
  MemoryStore empty = ingest({}, 8, 64);
  try {
    select_entry_points(q, empty, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyStore);
  }
}

TEST(EntryPoints, MatchBruteForceTop10) {
  std::mt19937_64 rng(5);
  auto records = random_records(rng, 200, 16);
  auto store = ingest(records);
  RetrievalParams p;
  p.similarity_threshold = 0.0;
  p.max_entries = 10;
  for (int t = 0; t < 20; ++t) {
    const auto q = random_unit(rng, 16);
    const auto expected = oracle::retrieve(records, q, p);
    std::vector<std::string> got;
    for (const auto& e : select_entry_points(q, store, p)) got.push_back(store.record(e.index).id);
    EXPECT_EQ(got, expected.entry_ids);
  }
}

TEST(Retrieve, SingleRecordStore) {
  std::mt19937_64 rng(6);
  auto store = ingest(random_records(rng, 1, 8));
  RetrievalParams p;
  p.similarity_threshold = 0.0;
  auto q = random_unit(rng, 8);
  if (cosine_similarity(q, store.record(0).embedding) < 0) {
    for (auto& x : q) x = -x;
  }
  auto e = retrieve_embedded("q", q, store, p);
  ASSERT_EQ(e.candidates.size(), 1u);
  EXPECT_EQ(e.candidates[0].rank, 1u);
  EXPECT_EQ(e.candidates[0].compound_score, e.candidates[0].cosine);
}

TEST(Retrieve, NoEntryPointIsFlagged) {
  std::mt19937_64 rng(7);
  auto store = ingest(random_records(rng, 20, 64));
  RetrievalParams p;
  p.similarity_threshold = 0.99;
  auto e = retrieve_embedded("q", random_unit(rng, 64), store, p);
  EXPECT_TRUE(e.no_entry_point);
  EXPECT_TRUE(e.candidates.empty());
  EXPECT_TRUE(e.entry_point_id.empty());
}

TEST(Retrieve, MatchesOracleBothExpansions) {
  std::mt19937_64 rng(8);
  auto records = random_records(rng, 120, 8, {0.3, 0.3, true});
  auto store = ingest(records, 6);
  const auto graph = graph_of(store);
  for (int t = 0; t < 30; ++t) {
    RetrievalParams p;
    p.similarity_threshold = 0.1;
    p.max_entries = 1 + t % 12;
    p.expansion = t % 2 ? Expansion::kGraphOneHop : Expansion::kFullScan;
    p.factors = {t % 3 != 0, t % 4 != 0, t % 5 != 0, t % 7 == 0};
    const auto q = random_unit(rng, 8);
    const auto got = retrieve_embedded("q", q, store, p);
    EXPECT_EQ(oracle::compare(oracle::retrieve(records, q, p, graph), got, 1e-9), "") << "trial " << t;
  }
}

// The 1-hop path prefilters on quantized vectors; a threshold sitting exactly
// on a record's cosine must still admit that record.
TEST(Retrieve, GraphEntryPointsExactAtThreshold) {
  std::mt19937_64 rng(12);
  auto records = random_records(rng, 400, 64);
  auto store = ingest(records);
  const auto graph = graph_of(store);
  for (int t = 0; t < 40; ++t) {
    const auto q = random_unit(rng, 64);
    RetrievalParams all;
    all.similarity_threshold = 0.0;
    all.max_entries = records.size();
    const auto scan = retrieve_embedded("q", q, store, all);
    ASSERT_FALSE(scan.no_entry_point);
    std::vector<double> cosines;
    for (const auto& m : scan.candidates) cosines.push_back(m.cosine);
    std::sort(cosines.rbegin(), cosines.rend());

    RetrievalParams p;
    p.expansion = Expansion::kGraphOneHop;
    p.max_entries = 1 + t % 8;
    p.similarity_threshold = cosines[t % 6];
    auto full = p;
    full.expansion = Expansion::kFullScan;
    const auto got = retrieve_embedded("q", q, store, p);
    EXPECT_EQ(got.entry_point_ids, retrieve_embedded("q", q, store, full).entry_point_ids) << "trial " << t;

    p.similarity_threshold -= 1e-12;
    EXPECT_EQ(oracle::compare(oracle::retrieve(records, q, p, graph), retrieve_embedded("q", q, store, p), 1e-9), "")
        << "trial " << t;
  }
}

TEST(Retrieve, GraphPoolIsSubsetAndAnchorAgrees) {
  std::mt19937_64 rng(9);
  auto records = random_records(rng, 300, 16);
  auto store = ingest(records);
  for (int t = 0; t < 20; ++t) {
    RetrievalParams full;
    full.similarity_threshold = 0.0;
    full.max_entries = 300;
    RetrievalParams hop = full;
    hop.max_entries = 4;
    hop.expansion = Expansion::kGraphOneHop;
    const auto q = random_unit(rng, 16);
    const auto a = retrieve_embedded("q", q, store, full);
    const auto b = retrieve_embedded("q", q, store, hop);
    EXPECT_EQ(a.candidates[0].record_id, b.candidates[0].record_id);
    std::set<std::string> pool;
    for (const auto& m : a.candidates) pool.insert(m.record_id);
    for (const auto& m : b.candidates) EXPECT_TRUE(pool.count(m.record_id));
  }
}

TEST(Retrieve, FixtureEarQuery) {
  const auto& fx = testing::fixture_stores();
  TrigramEmbedder embed;
  for (auto expansion : {Expansion::kFullScan, Expansion::kGraphOneHop}) {
    RetrievalParams p;
    p.expansion = expansion;
    auto e = retrieve(testing::kEarQuery, fx.augmented, p, embed);
    ASSERT_FALSE(e.candidates.empty());
    EXPECT_EQ(e.candidates[0].record_id, "ear-incident");
  }
}

TEST(Retrieve, DeterministicAndJsonRoundTrip) {
  std::mt19937_64 rng(10);
  auto store = ingest(random_records(rng, 100, 16));
  RetrievalParams p;
  p.similarity_threshold = 0.0;
  const auto q = random_unit(rng, 16);
  const auto a = retrieve_embedded("q", q, store, p);
  EXPECT_EQ(a, retrieve_embedded("q", q, store, p));
  EXPECT_EQ(explanation_from_json(to_json(a)), a);
  EXPECT_EQ(to_json(explanation_from_json(to_json(a))).dump(), to_json(a).dump());
}

TEST(Params, ValidationAndJson) {
  RetrievalParams p;
  p.max_entries = 0;
  EXPECT_THROW(p.validate(), Error);
  p.max_entries = 3;
  p.similarity_threshold = 1.5;
  EXPECT_THROW(p.validate(), Error);
  p.similarity_threshold = 0.3;
  p.expansion = Expansion::kGraphOneHop;
  p.factors.use_relevance = true;
  EXPECT_EQ(params_from_json(to_json(p)), p);
  EXPECT_THROW(params_from_json({{"max_entries", 0}}), Error);
  EXPECT_THROW(params_from_json({{"bogus", 1}}), Error);
  EXPECT_EQ(params_from_json({{"max_entries", 7}}).max_entries, 7u);
}

}  // namespace
}  // namespace episodic
