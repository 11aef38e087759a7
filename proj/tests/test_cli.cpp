#include <gtest/gtest.h>

#include <sstream>

#include "memedial/backends.hpp"
#include "memedial/cli.hpp"
#include "memedial/dialogue.hpp"
#include "memedial/meme_library.hpp"
#include "memedial/mock_backends.hpp"
#include "memedial/pipeline.hpp"
#include "oracles.hpp"

using namespace memedial;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "memedial");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::string kData = MEMEDIAL_DATA_DIR;

// "rank id ..." rows of the retrieve table, in printed order.
std::vector<std::string> ranked_ids(const std::string& out) {
  std::istringstream in(out);
  std::vector<std::string> ids;
  bool table = false;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("rank\t", 0) == 0) {
      table = true;
      continue;
    }
    if (!table) continue;
    if (line.empty()) break;
    std::istringstream row(line);
    std::string rank, id;
    row >> rank >> id;
    ids.push_back(id);
  }
  return ids;
}

}  // namespace

TEST(Cli, HelpExitsZero) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("generate"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"generate", "--turns", "0", "--mock"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"generate", "--mode", "poem", "--mock"}).code, cli::kExitUsage);
}

TEST(Cli, GenerateTwiceGivesIdenticalTreesWithoutNetwork) {
  testutil::TempDir dir;
  network::reset_attempts();
  for (const char* name : {"a", "b"}) {
    const auto r = run_cli({"generate", "--mock", "--seed", "7", "--turns", "6", "--sessions", "3",
                            "--out", (dir / name).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(testutil::snapshot_tree(dir / "a"), testutil::snapshot_tree(dir / "b"));
  EXPECT_EQ(network::attempts(), 0u);
  const auto other = run_cli({"generate", "--mock", "--seed", "8", "--turns", "6", "--sessions",
                              "3", "--out", (dir / "c").string()});
  ASSERT_EQ(other.code, 0);
  EXPECT_NE(testutil::snapshot_tree(dir / "a"), testutil::snapshot_tree(dir / "c"));
}

TEST(Cli, ConfigFileAndFlagsCombine) {
  testutil::TempDir dir;
  testutil::write_file(dir / "run.json", R"({"turns": 4, "sessions": 2, "mode": "role"})");
  const auto r = run_cli({"--config", (dir / "run.json").string(), "--mock", "generate", "--out",
                          (dir / "out").string(), "--sessions", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto sessions = load_dataset_sessions(dir / "out");
  ASSERT_EQ(sessions.size(), 1u);
  EXPECT_EQ(sessions[0].turns.size(), 4u);
  EXPECT_EQ(sessions[0].session_id, "role-0000");
}

TEST(Cli, RetrieveOrderMatchesOracle) {
  const auto r = run_cli({"--mock", "retrieve", "--scenario", "朋友之间闲聊周末计划", "--emotion",
                          "开心", "--motivation", "表达认同", "--k", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ids = ranked_ids(r.out);
  ASSERT_EQ(ids.size(), 5u);

  const auto lib = load_library(kData + "/sample_library.jsonl");
  const auto scen = mock_embed("朋友之间闲聊周末计划", *lib.embedding_dim);
  const auto emo = mock_embed("开心", *lib.embedding_dim);
  const auto mot = mock_embed("表达认同", *lib.embedding_dim);
  const double w[4] = {0.25, 0.25, 0.25, 0.25};
  std::vector<std::pair<double, std::string>> totals;
  for (const auto& rec : lib.records) {
    totals.emplace_back(oracle::score(scen, emo, mot, *rec.embeddings, w).total, rec.id);
  }
  EXPECT_EQ(ids, oracle::top_k_ids(totals, 5));
  EXPECT_NE(r.out.find("gate\t"), std::string::npos);
}

TEST(Cli, RetrieveOnSingleMemeLibrary) {
  testutil::TempDir dir;
  std::mt19937_64 gen(1);
  const auto lib = testutil::random_library(gen, 1, kDefaultMockDim);
  save_library(lib, dir / "one.jsonl");
  const auto r = run_cli({"--mock", "retrieve", "--library", (dir / "one.jsonl").string(),
                          "--utterance", "今天好累", "--utterance", "我也是", "--k", "1",
                          "--theta0", "-5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ranked_ids(r.out), (std::vector<std::string>{"m0000"}));
  EXPECT_NE(r.out.find("turn\t3"), std::string::npos);
  EXPECT_NE(r.out.find("selected\tm0000"), std::string::npos);
}

TEST(Cli, RetrieveNeedsCompleteSummary) {
  const auto r = run_cli({"--mock", "retrieve", "--scenario", "x"});
  EXPECT_EQ(r.code, cli::kExitRuntime);
  EXPECT_NE(r.err.find("together"), std::string::npos);
}

TEST(Cli, UnembeddedLibraryPointsToEmbed) {
  testutil::TempDir dir;
  auto lib = load_library(kData + "/sample_library.jsonl");
  for (auto& rec : lib.records) rec.embeddings.reset();
  lib.embedding_dim.reset();
  save_library(lib, dir / "raw.jsonl");
  const auto r = run_cli({"--mock", "retrieve", "--library", (dir / "raw.jsonl").string(),
                          "--utterance", "hi"});
  EXPECT_EQ(r.code, cli::kExitRuntime);
  EXPECT_NE(r.err.find("embed"), std::string::npos);

  const auto e = run_cli({"--mock", "embed", "--library", (dir / "raw.jsonl").string(), "--out",
                          (dir / "embedded.jsonl").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_TRUE(load_library(dir / "embedded.jsonl").fully_embedded());
}

TEST(Cli, MissingLibraryIsRuntimeError) {
  const auto r = run_cli({"--mock", "retrieve", "--library", "/nonexistent/lib.jsonl",
                          "--utterance", "hi"});
  EXPECT_EQ(r.code, cli::kExitRuntime);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, EvaluateWritesReportAndSummary) {
  testutil::TempDir dir;
  ASSERT_EQ(run_cli({"--mock", "generate", "--turns", "6", "--sessions", "2", "--out",
                     (dir / "ds").string()})
                .code,
            0);
  const auto r = run_cli({"--mock", "evaluate", "--dataset", (dir / "ds").string(), "--judge",
                          "--baseline", "--out", (dir / "report.tsv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("greedy"), std::string::npos);
  EXPECT_NE(r.out.find("random"), std::string::npos);
  EXPECT_NE(testutil::read_file(dir / "report.tsv").find("judge_mean"), std::string::npos);
}

TEST(Cli, StatsKeywordTable) {
  const auto r = run_cli({"stats", "--dimension", "emotion", "--top", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("emotion"), std::string::npos);
}

TEST(Cli, AnnotateSampleImages) {
  testutil::TempDir dir;
  const auto r = run_cli({"--mock", "annotate", "--images", kData + "/images", "--out",
                          (dir / "lib.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lib = load_library(dir / "lib.jsonl");
  EXPECT_EQ(lib.size(), 24u);
  EXPECT_FALSE(lib.fully_embedded());
}
