#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "ngcf/corpus.hpp"

namespace fs = std::filesystem;
using ngcf::cli::run;

namespace {

const std::string kFixture = NGCF_TEST_DATA "/fixture.txt";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result ngcf_run(std::vector<std::string> args) {
  args.insert(args.begin(), "ngcf");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh scratch directory per test.
class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("ngcf_cli_" + std::string(info->name()) + "_" +
                                        std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // vocab + count on the fixture.
  void prepare(int order = 2) {
    ASSERT_EQ(ngcf_run({"vocab", kFixture, "-o", path("v"), "--min-count", "2"}).code, 0);
    ASSERT_EQ(ngcf_run({"count", kFixture, "--vocab", path("v"), "-o", path("c"), "--order", std::to_string(order)}).code, 0);
  }

  fs::path dir_;
};

double field(const std::string& report, const std::string& key) {
  const auto p = report.find(key + "=");
  return std::stod(report.substr(p + key.size() + 1));
}

}  // namespace

TEST_F(Cli, VocabIsByteStable) {
  ASSERT_EQ(ngcf_run({"vocab", kFixture, "-o", path("a")}).code, 0);
  ASSERT_EQ(ngcf_run({"vocab", kFixture, "-o", path("b")}).code, 0);
  EXPECT_FALSE(slurp(path("a")).empty());
  EXPECT_EQ(slurp(path("a")), slurp(path("b")));
}

TEST_F(Cli, ShardedVocabMatchesSingleFile) {
  const std::string text = slurp(kFixture);
  const auto cut = text.find('\n', text.size() / 3) + 1;
  std::ofstream(path("s1")) << text.substr(0, cut);
  std::ofstream(path("s2")) << text.substr(cut);
  ASSERT_EQ(ngcf_run({"vocab", kFixture, "-o", path("whole"), "--min-count", "2"}).code, 0);
  ASSERT_EQ(ngcf_run({"vocab", path("s2"), path("s1"), "-o", path("shards"), "--min-count", "2"}).code, 0);
  EXPECT_EQ(slurp(path("whole")), slurp(path("shards")));
}

TEST_F(Cli, UnkOnlyVocabularyWarns) {
  const auto r = ngcf_run({"vocab", kFixture, "-o", path("v"), "--min-count", "1000000"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_NE(r.out.find("vocab_size=1 "), std::string::npos) << r.out;
}

TEST_F(Cli, UsageAndInputErrors) {
  EXPECT_EQ(ngcf_run({}).code, 2);
  EXPECT_EQ(ngcf_run({"frobnicate"}).code, 2);
  EXPECT_EQ(ngcf_run({"vocab", path("missing"), "-o", path("v")}).code, 2);
  EXPECT_EQ(ngcf_run({"vocab", kFixture, "-o", path("v"), "--bogus"}).code, 2);
  EXPECT_EQ(ngcf_run({"vocab", kFixture, "-o", path("v"), "--min-count", "0"}).code, 2);
  std::ofstream(path("bad")) << "ok \xff\xfe bytes\n";
  const auto r = ngcf_run({"vocab", path("bad"), "-o", path("v")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("byte 3"), std::string::npos) << r.err;
  EXPECT_EQ(ngcf_run({"--help"}).code, 0);
}

TEST_F(Cli, PipelineRunsWithinOneMinute) {
  const auto started = std::chrono::steady_clock::now();
  prepare();
  ASSERT_EQ(ngcf_run({"cluster", "--vocab", path("v"), "--counts", path("c"), "-o", path("cl"), "--c1", "10", "--c2", "10"}).code, 0);
  ASSERT_EQ(ngcf_run({"build", "--type", "clustered", "--vocab", path("v"), "--counts", path("c"), "--clusters", path("cl"), "-o", path("m")}).code, 0);
  const auto a = ngcf_run({"eval", "--model", path("m"), "--vocab", path("v"), kFixture});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = ngcf_run({"eval", "--model", path("m"), "--vocab", path("v"), kFixture});
  EXPECT_EQ(a.out, b.out);
  const double pp = field(a.out, "pp");
  const double lp = field(a.out, "logprob");
  const double scored = field(a.out, "scored");
  EXPECT_NEAR(pp, std::exp(-lp / scored), 1e-6 * pp);
  EXPECT_LT(std::chrono::steady_clock::now() - started, std::chrono::seconds(60));
}

TEST_F(Cli, ClusterIsDeterministicAndMonotone) {
  prepare();
  for (const char* prefix : {"x", "y"})
    ASSERT_EQ(ngcf_run({"cluster", "--vocab", path("v"), "--counts", path("c"), "-o", path(prefix), "--c1", "8",
                        "--c2", "8", "--init", "random", "--seed", "5"})
                  .code,
              0);
  for (const char* ext : {".words", ".contexts", ".trace"}) EXPECT_EQ(slurp(path(std::string("x") + ext)), slurp(path(std::string("y") + ext)));
  std::istringstream trace(slurp(path("x.trace")));
  double prev = -1e300;
  int it, moves;
  double value, secs;
  while (trace >> it >> value >> moves >> secs) {
    EXPECT_GE(value, prev);
    prev = value;
  }
}

TEST_F(Cli, WideHeuristicEqualsFullSearch) {
  prepare();
  ASSERT_EQ(ngcf_run({"cluster", "--vocab", path("v"), "--counts", path("c"), "-o", path("full"), "--c1", "6", "--c2", "6"}).code, 0);
  ASSERT_EQ(ngcf_run({"cluster", "--vocab", path("v"), "--counts", path("c"), "-o", path("heur"), "--c1", "6", "--c2", "6",
                      "--heuristic", "--h", "6", "--t", "6"})
                .code,
            0);
  EXPECT_EQ(slurp(path("full.words")), slurp(path("heur.words")));
  EXPECT_EQ(slurp(path("full.contexts")), slurp(path("heur.contexts")));
}

TEST_F(Cli, TargetsAboveClusterCountIsUsageError) {
  prepare();
  const auto r = ngcf_run({"cluster", "--vocab", path("v"), "--counts", path("c"), "-o", path("cl"), "--c1", "4", "--c2", "4",
                           "--heuristic", "--t", "5"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(ngcf_run({"cluster", "--vocab", path("v"), "--counts", path("c"), "-o", path("cl"), "--order", "3"}).code, 3);
}

TEST_F(Cli, UniformModelScoresVocabularySize) {
  prepare();
  ASSERT_EQ(ngcf_run({"build", "--type", "uniform", "--vocab", path("v"), "-o", path("u")}).code, 0);
  const auto r = ngcf_run({"eval", "--model", path("u"), "--vocab", path("v"), kFixture});
  ASSERT_EQ(r.code, 0);
  std::ifstream vin(path("v"));
  const auto v = ngcf::read_vocabulary(vin);
  EXPECT_NEAR(field(r.out, "pp"), static_cast<double>(v.size()), 1e-6);
}

TEST_F(Cli, VocabularyMismatchIsConsistencyError) {
  prepare();
  ASSERT_EQ(ngcf_run({"build", "--type", "backoff", "--vocab", path("v"), "--counts", path("c"), "-o", path("m")}).code, 0);
  ASSERT_EQ(ngcf_run({"vocab", kFixture, "-o", path("v3"), "--min-count", "3"}).code, 0);
  const auto r = ngcf_run({"eval", "--model", path("m"), "--vocab", path("v3"), kFixture});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(Cli, CompareTableShapeAndImprovement) {
  const auto r = ngcf_run({"compare", kFixture, "--sizes", "2k,5k", "--cutoffs", "2,10", "--clusters", "6,8", "--iterations", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "tokens\tbackoff_c2\tbackoff_c10\tclustered_6\tclustered_8\timpr_clustered_6\timpr_clustered_8");
  int rows = 0;
  for (std::string line; std::getline(in, line);) {
    std::istringstream f(line);
    double tokens, b2, b10, c6, c8, i6, i8;
    ASSERT_TRUE(f >> tokens >> b2 >> b10 >> c6 >> c8 >> i6 >> i8) << line;
    const double best = std::min(b2, b10);
    EXPECT_NEAR(i6, (best - c6) / best * 100, 0.06);
    EXPECT_NEAR(i8, (best - c8) / best * 100, 0.06);
    ++rows;
  }
  EXPECT_EQ(rows, 2);
}

TEST_F(Cli, CompareOnTooSmallCorpusListsSizes) {
  const auto r = ngcf_run({"compare", kFixture, "--sizes", "5k,50k"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("achievable requested sizes: 5000"), std::string::npos) << r.err;
}
