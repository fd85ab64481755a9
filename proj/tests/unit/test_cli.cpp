#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace specsense;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "specsense");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("specsense-cli-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, HelpExitsZero) {
  const auto r = invoke({"--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("eval-froc"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"transmogrify"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"eval-roc", "--bogus", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"eval-roc"}).code, cli::kExitUsage);
}

TEST(Cli, DomainErrorsExitOne) {
  const auto r = invoke({"eval-roc", "--scores", "/nonexistent/specsense/scores.tsv"});
  EXPECT_EQ(r.code, cli::kExitDomain);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, EvalRocOnPerfectSeparation) {
  const auto dir = scratch("roc");
  std::vector<eval::ScoredChannel> s;
  for (int i = 0; i < 6; ++i) s.push_back({"p" + std::to_string(i), 3600e6, 0.9 + 0.01 * i, true});
  for (int i = 0; i < 6; ++i) s.push_back({"n" + std::to_string(i), 3600e6, 0.1 + 0.01 * i, false});
  eval::write_scores(dir / "scores.tsv", s);
  const auto r = invoke({"eval-roc", "--scores", (dir / "scores.tsv").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("AUC 1.000", 0), 0u) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "roc.tsv"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, SeedComesFromEnvironment) {
  const auto a = invoke({"gradcheck", "--draws", "1", "--seed", "5"});
  ::setenv("SPECSENSE_SEED", "5", 1);
  const auto b = invoke({"gradcheck", "--draws", "1"});
  ::unsetenv("SPECSENSE_SEED");
  EXPECT_EQ(a.code, cli::kExitOk) << a.out;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SmallPipelineIsReproducible) {
  const auto dir = scratch("pipe");
  const std::string ds = (dir / "ds").string();
  ASSERT_EQ(invoke({"synth", "--out", ds, "--n", "12", "--seed", "3"}).code, cli::kExitOk);
  ASSERT_EQ(invoke({"split", "--dataset", ds, "--out", (dir / "split.json").string(), "--test-size", "6",
                    "--train-channels", "20", "--seed", "3"})
                .code,
            cli::kExitOk);
  for (int run = 0; run < 2; ++run) {
    const auto model = (dir / ("knn" + std::to_string(run) + ".bin")).string();
    const auto r = invoke({"train", "--dataset", ds, "--split", (dir / "split.json").string(), "--detector", "knn",
                           "--features", "timeagg", "--k", "3", "--model", model, "--seed", "3"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto sr = invoke({"score", "--dataset", ds, "--split", (dir / "split.json").string(), "--model", model,
                            "--out", (dir / ("scores" + std::to_string(run) + ".tsv")).string()});
    ASSERT_EQ(sr.code, cli::kExitOk) << sr.err;
  }
  EXPECT_EQ(slurp(dir / "knn0.bin"), slurp(dir / "knn1.bin"));
  EXPECT_EQ(slurp(dir / "scores0.tsv"), slurp(dir / "scores1.tsv"));
  EXPECT_EQ(invoke({"train", "--dataset", ds, "--split", (dir / "split.json").string(), "--detector", "ed",
                    "--model", (dir / "ed.bin").string()})
                .code,
            cli::kExitUsage);
  std::filesystem::remove_all(dir);
}
