#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "support/test_support.hpp"

namespace episodic {
namespace {

using testing::fixture_path;
using testing::run_command;

std::string cli() { return testing::cli_path(); }

std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testing::temp_dir("cli");
    const auto augment = run_command("SOURCE_DATE_EPOCH=1700000000 " + cli() + " augment --corpus " +
                                     quoted(fixture_path("corpus.jsonl")) + " --stub " +
                                     quoted(fixture_path("augment_stub.json")) + " --out " + quoted(dir_ / "aug.jsonl") +
                                     " --provenance " + quoted(dir_ / "prov.jsonl") + " 2>&1");
    ASSERT_EQ(augment.status, 0) << augment.out;
    const auto raw = run_command(cli() + " ingest-raw --corpus " + quoted(fixture_path("corpus.jsonl")) + " --out " +
                                 quoted(dir_ / "raw.jsonl") + " 2>&1");
    ASSERT_EQ(raw.status, 0) << raw.out;
  }
  static std::filesystem::path dir_;
};

std::filesystem::path Cli::dir_;

TEST_F(Cli, AugmentedStoreMatchesLibraryBuild) {
  const auto cli_store = load_store(dir_ / "aug.jsonl");
  EXPECT_TRUE(std::ranges::equal(cli_store.records(), testing::fixture_stores().augmented.records()));
  EXPECT_EQ(cli_store.metadata().created_at, "2023-11-14T22:13:20Z");
}

TEST_F(Cli, QueryJsonRanksEarIncidentFirst) {
  const auto r = run_command(cli() + " query --store " + quoted(dir_ / "aug.jsonl") + " --text '" + testing::kEarQuery +
                             "' --json");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_FALSE(j["candidates"].empty());
  EXPECT_EQ(j["candidates"][0]["record_id"], "ear-incident");
  EXPECT_EQ(j["candidates"][0]["rank"], 1);
}

TEST_F(Cli, EvalRerunIsByteIdentical) {
  auto eval = [&](const std::string& out) {
    return run_command(cli() + " eval --queries " + quoted(fixture_path("queries.txt")) + " --store " +
                       quoted(dir_ / "aug.jsonl") + " --raw-store " + quoted(dir_ / "raw.jsonl") + " --profile " +
                       quoted(fixture_path("persona.json")) + " --stub " + quoted(fixture_path("eval_stub.json")) +
                       " --format json --out " + quoted(dir_ / out) + " 2>&1");
  };
  const auto a = eval("a.json");
  ASSERT_EQ(a.status, 0) << a.out;
  const auto b = eval("b.json");
  ASSERT_EQ(b.status, 0) << b.out;
  const auto first = testing::read_text(dir_ / "a.json");
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(first, testing::read_text(dir_ / "b.json"));
  EXPECT_EQ(nlohmann::json::parse(first)["rows"].size(), 4u);
}

TEST_F(Cli, EmptyCorpusExitsWithUserError) {
  const auto empty = dir_ / "empty.jsonl";
  { std::ofstream(empty) << ""; }
  const auto r = run_command(cli() + " augment --corpus " + quoted(empty) + " --stub " +
                             quoted(fixture_path("augment_stub.json")) + " --out " + quoted(dir_ / "x.jsonl") +
                             " --json 2>&1");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("EmptyCorpus"), std::string::npos) << r.out;
}

TEST_F(Cli, UnknownFlagExitsWithUserError) {
  EXPECT_EQ(run_command(cli() + " query --bogus 2>&1").status, 1);
  EXPECT_EQ(run_command(cli() + " query --store " + quoted(dir_ / "missing.jsonl") + " --text x 2>&1").status, 1);
}

TEST_F(Cli, UnreachableProviderBecomesCellErrors) {
  const auto r = run_command(cli() + " eval --queries " + quoted(fixture_path("queries.txt")) +
                             " --mode-matrix baseline --llm-endpoint http://127.0.0.1:9/v1/chat/completions 2>&1");
  // Cell errors are reported inside the table, so the run itself succeeds.
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("_error: ProviderUnavailable"), std::string::npos) << r.out;
}

}  // namespace
}  // namespace episodic
