#include <gtest/gtest.h>

#include <random>

#include "episodic/error.hpp"
#include "episodic/persona.hpp"
#include "support/test_support.hpp"

namespace episodic {
namespace {

using testing::fixture_profile;
using testing::fixture_stores;
using testing::kEarQuery;

class FailingLlm : public LlmProvider {
 public:
  explicit FailingLlm(ErrorCode code) : code_(code) {}
  std::string complete(const ChatRequest&) override { throw Error(code_, "provider failed"); }
  std::string name() const override { return "failing"; }

 private:
  ErrorCode code_;
};

std::size_t request_tokens(const ChatRequest& r) {
  std::size_t total = (r.system_text.size() + 3) / 4;
  for (const auto& m : r.messages) total += (m.text.size() + 3) / 4;
  return total;
}

std::vector<Turn> turns_of_size(std::size_t n, std::size_t chars) {
  std::vector<Turn> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto user = "q" + std::to_string(i);
    auto reply = "a" + std::to_string(i);
    user.resize(chars, '.');
    reply.resize(chars, '.');
    out.push_back({user, reply, std::nullopt});
  }
  return out;
}

RetrievalExplanation ear_retrieval(PersonaMode mode, std::size_t max_entries = 5) {
  RetrievalParams p;
  p.max_entries = max_entries;
  TrigramEmbedder embed;
  const auto& fx = fixture_stores();
  const auto& store = mode == PersonaMode::kTraditionalRag ? fx.raw : fx.augmented;
  return retrieve(kEarQuery, store, effective_params(mode, p), embed);
}

TEST(Tokens, Estimate) {
  EXPECT_EQ(estimate_tokens(""), 0u);
  EXPECT_EQ(estimate_tokens("12345678"), 2u);
  EXPECT_EQ(estimate_tokens("123456789"), 3u);
  EXPECT_EQ(estimate_tokens("1"), 1u);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> len(0, 100);
  for (int i = 0; i < 200; ++i) {
    const std::string a(len(rng), 'x');
    const std::string b(len(rng), 'y');
    EXPECT_GE(estimate_tokens(a + b), std::max(estimate_tokens(a), estimate_tokens(b)));
  }
}

TEST(Profile, JsonAndValidation) {
  auto p = fixture_profile();
  EXPECT_EQ(profile_from_json(to_json(p)), p);
  auto j = to_json(p);
  j["context_budget"] = 100;
  EXPECT_THROW(profile_from_json(j), Error);
  j = to_json(p);
  j["voice"] = "deep";
  EXPECT_THROW(profile_from_json(j), Error);
  j = to_json(p);
  j.erase("name");
  EXPECT_THROW(profile_from_json(j), Error);
}

TEST(Modes, NamesAndParams) {
  for (auto m : kAllModes) EXPECT_EQ(parse_mode(mode_name(m)), m);
  EXPECT_FALSE(parse_mode("hybrid"));
  RetrievalParams p;
  EXPECT_EQ(effective_params(PersonaMode::kTraditionalRag, p).factors, FactorToggles::cosine_only());
  EXPECT_EQ(effective_params(PersonaMode::kAutonoesis, p), p);
}

TEST(Context, BaselineHasNoRetrievalBlocks) {
  auto c = construct_context(fixture_profile(), PersonaMode::kBaseline, nullptr, nullptr, {}, kEarQuery);
  const auto& s = c.request.system_text;
  EXPECT_NE(s.find(kCharacterHeader), std::string::npos);
  EXPECT_NE(s.find(kInstructionsHeader), std::string::npos);
  EXPECT_EQ(s.find(kScenesHeader), std::string::npos);
  EXPECT_EQ(s.find(kRawValuesHeader), std::string::npos);
  ASSERT_EQ(c.request.messages.size(), 1u);
  EXPECT_EQ(c.request.messages[0].text, kEarQuery);
  const auto e = ear_retrieval(PersonaMode::kAutonoesis);
  EXPECT_THROW(construct_context(fixture_profile(), PersonaMode::kBaseline, &e, nullptr, {}, "q"), Error);
  EXPECT_THROW(construct_context(fixture_profile(), PersonaMode::kAutonoesis, nullptr, nullptr, {}, "q"), Error);
}

TEST(Context, RankedDataListsEveryTriple) {
  const auto e = ear_retrieval(PersonaMode::kAutonoesisRankedData, 3);
  ASSERT_EQ(e.candidates.size(), 3u);
  auto c = construct_context(fixture_profile(), PersonaMode::kAutonoesisRankedData, &e, &fixture_stores().augmented,
                             {}, kEarQuery);
  const auto& s = c.request.system_text;
  const auto block = s.substr(s.find(kRawValuesHeader));
  std::size_t lines = 0;
  for (std::size_t pos = block.find("\n- "); pos != std::string::npos; pos = block.find("\n- ", pos + 1)) ++lines;
  EXPECT_EQ(lines, 3u);
  for (const auto& m : e.candidates) {
    const auto line = "- [" + std::to_string(m.rank) + "] " + m.record_id + ": valence=" +
                      nlohmann::json(m.valence).dump() + ", arousal=" + nlohmann::json(m.arousal).dump() +
                      ", relevance=" + nlohmann::json(m.relevance_score).dump();
    EXPECT_NE(block.find(line), std::string::npos) << line;
  }
  EXPECT_EQ(c.scene_ids, (std::vector<std::string>{e.candidates[0].record_id, e.candidates[1].record_id,
                                                   e.candidates[2].record_id}));
}

TEST(Context, SectionOrderPerMode) {
  const auto& fx = fixture_stores();
  for (auto mode : kAllModes) {
    const auto e = ear_retrieval(mode);
    const auto* store = mode == PersonaMode::kTraditionalRag ? &fx.raw : &fx.augmented;
    auto c = construct_context(fixture_profile(), mode, mode == PersonaMode::kBaseline ? nullptr : &e,
                               mode == PersonaMode::kBaseline ? nullptr : store, {}, kEarQuery);
    const auto& s = c.request.system_text;
    const auto a = s.find(kCharacterHeader);
    const auto b = s.find(kInstructionsHeader);
    const auto d = s.find(kScenesHeader);
    const auto v = s.find(kRawValuesHeader);
    EXPECT_EQ(a, 0u);
    EXPECT_LT(a, b);
    EXPECT_EQ(d != std::string::npos, mode != PersonaMode::kBaseline);
    EXPECT_EQ(v != std::string::npos, mode == PersonaMode::kAutonoesisRankedData);
    if (d != std::string::npos) {
      EXPECT_LT(b, d);
    }
    if (v != std::string::npos) {
      EXPECT_LT(d, v);
    }
  }
}

TEST(Context, TraditionalUsesRawNarrative) {
  const auto& fx = fixture_stores();
  const auto e = ear_retrieval(PersonaMode::kTraditionalRag);
  auto c = construct_context(fixture_profile(), PersonaMode::kTraditionalRag, &e, &fx.raw, {}, kEarQuery);
  const auto& top = fx.raw.record(*fx.raw.find(e.candidates[0].record_id));
  EXPECT_NE(c.request.system_text.find(top.first_person_narrative), std::string::npos);
  EXPECT_EQ(c.request.system_text.find("Setting: "), std::string::npos);
  for (const auto& m : e.candidates) EXPECT_EQ(m.compound_score, m.cosine);
}

TEST(Context, NoEntryPointGivesEmptyBlock) {
  RetrievalExplanation empty;
  empty.no_entry_point = true;
  auto c = construct_context(fixture_profile(), PersonaMode::kAutonoesis, &empty, &fixture_stores().augmented, {},
                             "q");
  EXPECT_NE(c.request.system_text.find(std::string(kScenesHeader) + "\n(none)"), std::string::npos);
  EXPECT_TRUE(c.scene_ids.empty());
}

// Ten history turns of known size; for every budget the kept turns are the
// most recent ones, as many as fit, and scenes only go once history is gone.
TEST(Context, DropOrderExhaustive) {
  const auto& fx = fixture_stores();
  const auto e = ear_retrieval(PersonaMode::kAutonoesisRankedData);
  const auto history = turns_of_size(10, 40);  // 10 + 10 tokens per turn
  auto profile = fixture_profile();
  profile.context_budget = 100000;
  const auto full = construct_context(profile, PersonaMode::kAutonoesisRankedData, &e, &fx.augmented, history, "why?");
  const std::size_t without_history = full.sizes.total - 10 * 20;
  for (std::size_t budget = 256; budget <= full.sizes.total + 5; ++budget) {
    profile.context_budget = budget;
    ContextPrompt c;
    try {
      c = construct_context(profile, PersonaMode::kAutonoesisRankedData, &e, &fx.augmented, history, "why?");
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::kBudgetTooSmall);
      continue;
    }
    EXPECT_LE(request_tokens(c.request), budget);
    EXPECT_EQ(c.sizes.total, request_tokens(c.request));
    std::size_t expected_turns = 0;
    while (expected_turns < 10 && without_history + (expected_turns + 1) * 20 <= budget) ++expected_turns;
    EXPECT_EQ(c.history_turns, expected_turns) << budget;
    if (c.scenes_dropped > 0) {
      EXPECT_EQ(c.history_turns, 0u);
    }
    for (std::size_t i = 0; i < c.history_turns; ++i) {
      EXPECT_EQ(c.request.messages[2 * i].text, history[10 - c.history_turns + i].user_text);
    }
    for (std::size_t i = 0; i < c.scene_ids.size(); ++i) EXPECT_EQ(c.scene_ids[i], e.candidates[i].record_id);
    EXPECT_EQ(c.request.messages.back().text, "why?");
  }
}

TEST(Context, BudgetTooSmall) {
  auto profile = fixture_profile();
  profile.context_budget = 256;
  const std::string long_query(2000, 'w');
  try {
    construct_context(profile, PersonaMode::kBaseline, nullptr, nullptr, {}, long_query);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBudgetTooSmall);
  }
}

TEST(Answer, BaselineCannedReply) {
  ChatSession s{"s1", fixture_profile(), PersonaMode::kBaseline, {}, {}};
  auto stub = ScriptedStub::queue({"canned reply"});
  TrigramEmbedder embed;
  auto r = answer(s, "Hello?", nullptr, stub, embed);
  EXPECT_EQ(r.text, "canned reply");
  EXPECT_FALSE(r.explanation);
  EXPECT_EQ(s.history.size(), 1u);
  try {
    explain_last(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNothingToExplain);
  }
}

TEST(Answer, AutonoesisEarQuery) {
  ChatSession s{"s2", fixture_profile(), PersonaMode::kAutonoesis, {}, {}};
  auto stub = ScriptedStub::queue({"first", "second"});
  TrigramEmbedder embed;
  auto r = answer(s, kEarQuery, &fixture_stores().augmented, stub, embed);
  ASSERT_TRUE(r.explanation);
  EXPECT_EQ(r.explanation->candidates[0].record_id, "ear-incident");
  EXPECT_EQ(explain_last(s), *r.explanation);

  auto r2 = answer(s, "Tell me about the sunflowers in Arles.", &fixture_stores().augmented, stub, embed);
  EXPECT_EQ(explain_last(s), *r2.explanation);
  EXPECT_NE(explain_last(s).query_text, r.explanation->query_text);
  // The second request carries the first turn as history.
  EXPECT_EQ(stub.transcript()[1].messages.size(), 3u);
}

TEST(Answer, FailuresLeaveSessionUntouched) {
  ChatSession s{"s3", fixture_profile(), PersonaMode::kAutonoesisRankedData, {}, {}};
  auto stub = ScriptedStub::queue({"ok"});
  TrigramEmbedder embed;
  answer(s, kEarQuery, &fixture_stores().augmented, stub, embed);
  const auto before = s;
  const auto before_json = transcript_to_json(s).dump();
  for (auto code : {ErrorCode::kTimeout, ErrorCode::kProviderUnavailable}) {
    FailingLlm failing(code);
    try {
      answer(s, "And then?", &fixture_stores().augmented, failing, embed);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code);
    }
    EXPECT_EQ(s, before);
    EXPECT_EQ(transcript_to_json(s).dump(), before_json);
  }
  EXPECT_THROW(answer(s, "   ", &fixture_stores().augmented, stub, embed), Error);
  EXPECT_THROW(answer(s, "q", nullptr, stub, embed), Error);
  EXPECT_EQ(s, before);
}

TEST(Transcript, Json) {
  ChatSession s{"s4", fixture_profile(), PersonaMode::kAutonoesis, {}, {}};
  auto stub = ScriptedStub::queue({"ok"});
  TrigramEmbedder embed;
  answer(s, kEarQuery, &fixture_stores().augmented, stub, embed);
  auto j = transcript_to_json(s);
  EXPECT_EQ(j["mode"], "autonoesis");
  ASSERT_EQ(j["turns"].size(), 1u);
  EXPECT_EQ(explanation_from_json(j["turns"][0]["explanation"]), explain_last(s));
}

}  // namespace
}  // namespace episodic
