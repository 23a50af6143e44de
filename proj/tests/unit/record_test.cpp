#include <gtest/gtest.h>

#include <random>

#include "episodic/error.hpp"
#include "episodic/record.hpp"
#include "support/test_support.hpp"

namespace episodic {
namespace {

MemoryRecord good_record() {
  MemoryRecord r;
  r.id = "arles-1";
  r.first_person_narrative = "I painted sunflowers all week.";
  r.valence = 0.3;
  r.arousal = -0.2;
  r.granularity = Granularity::kYear;
  r.timestamp = -2587680000;
  r.latitude = 43.6766;
  r.longitude = 4.6278;
  r.relevance_score = 0.7;
  r.emotions = {{"joy", 0.8, 0.5}};
  r.embedding = {0.6f, 0.8f};
  return r;
}

ErrorCode code_of(const MemoryRecord& r) {
  try {
    validate_record(r);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "record was accepted";
  return ErrorCode::kInvalidArgument;
}

TEST(ValidateRecord, AcceptsValidRecord) {
  auto r = good_record();
  EXPECT_EQ(validate_record(r), r);
}

TEST(ValidateRecord, ValenceOutOfBoundsNamesFieldAndValue) {
  auto r = good_record();
  r.valence = 1.7;
  try {
    validate_record(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBoundViolation);
    EXPECT_EQ(e.details()["field"], "valence");
    EXPECT_DOUBLE_EQ(e.details()["value"].get<double>(), 1.7);
  }
}

TEST(ValidateRecord, UnpairedCoordinates) {
  auto r = good_record();
  r.longitude.reset();
  try {
    validate_record(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBoundViolation);
    EXPECT_EQ(e.details()["field"], "coordinates");
  }
}

TEST(ValidateRecord, ReportsEveryViolation) {
  auto r = good_record();
  r.valence = 2;
  r.arousal = -3;
  r.relevance_score = 1.5;
  try {
    validate_record(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.details()["violations"].size(), 3u);
  }
}

TEST(ValidateRecord, EmbeddingNorm) {
  auto r = good_record();
  r.embedding = {0.6f, 0.6f};
  EXPECT_EQ(code_of(r), ErrorCode::kBadEmbeddingNorm);
  r.embedding = {1.0f, std::nanf("")};
  EXPECT_EQ(code_of(r), ErrorCode::kBadEmbeddingNorm);
}

TEST(ValidateRecord, EmptyNarrativeAndDimension) {
  auto r = good_record();
  r.first_person_narrative.clear();
  EXPECT_EQ(code_of(r), ErrorCode::kMissingField);
  EXPECT_THROW(validate_record(good_record(), 3), Error);
}

TEST(ValidateRecord, EmotionBounds) {
  auto r = good_record();
  r.emotions.push_back({"rage", -0.9, 1.2});
  EXPECT_EQ(code_of(r), ErrorCode::kBoundViolation);
  r.emotions.back() = {"", 0, 0};
  EXPECT_EQ(code_of(r), ErrorCode::kMissingField);
}

TEST(RecordJson, RoundTrip) {
  std::mt19937_64 rng(7);
  for (const auto& r : testing::random_records(rng, 50, 16)) {
    EXPECT_EQ(record_from_json(record_to_json(r)), r);
  }
}

TEST(RecordJson, MissingAndUnknownFields) {
  auto j = record_to_json(good_record());
  j.erase("valence");
  try {
    validate_record(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingField);
    EXPECT_EQ(e.details()["field"], "valence");
  }
  j = record_to_json(good_record());
  j["mood"] = "sunny";
  EXPECT_THROW(record_from_json(j), Error);
}

TEST(Granularity, NamesRoundTrip) {
  for (auto g : {Granularity::kDay, Granularity::kMonth, Granularity::kYear, Granularity::kUnknown}) {
    EXPECT_EQ(parse_granularity(granularity_name(g)), g);
  }
  EXPECT_FALSE(parse_granularity("week"));
}

}  // namespace
}  // namespace episodic
