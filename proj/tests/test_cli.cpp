#include "helpers.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>
#include <map>

namespace fs = std::filesystem;
using namespace p2pl;

namespace {

struct Outcome {
  int code;
  std::string output;
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string(P2PL_CLI_BINARY) + " " + args + " 2>&1";
  Outcome o{-1, {}};
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) o.output.append(buf, n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::map<std::string, std::string> snapshot(const std::string& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path().string());
  return files;
}

// Shared workspace: a small synthetic corpus and a config pointing at it.
struct Workspace {
  std::string dir, cfg;
  Workspace() {
    dir = p2pl::testing::scratch_dir("cli");
    cfg = dir + "/run.cfg";
    write_file(cfg,
               "seed = 7\nselect = none\ntrees = 15\nsample_traditional = 600\nper_class = 0\n"
               "split_runs = 3\nsynth_traditional = 700\nsynth_bidding = 1500\nsynth_portfolio = 15\n"
               "traditional = " + dir + "/corpus/traditional.csv\nbidding = " + dir + "/corpus/bidding.csv\n");
    const Outcome o = run_cli("synth --config " + cfg + " --out " + dir + "/corpus");
    if (o.code != 0) throw std::runtime_error("synth failed: " + o.output);
  }
  std::string common() const { return "--config " + cfg; }
};

const Workspace& ws() {
  static const Workspace w;
  return w;
}

/// Runs a command twice into the same directory and checks both runs write
/// identical files.
void expect_reproducible(const std::string& name, const std::string& args, const std::vector<std::string>& expected) {
  const std::string out = ws().dir + "/" + name;
  fs::remove_all(out);
  const Outcome first = run_cli(args + " --out " + out);
  ASSERT_EQ(first.code, 0) << first.output;
  const auto a = snapshot(out);
  for (const auto& f : expected) EXPECT_TRUE(a.count(f)) << name << ": missing " << f;
  fs::remove_all(out);
  const Outcome second = run_cli(args + " --out " + out);
  ASSERT_EQ(second.code, 0) << second.output;
  const auto b = snapshot(out);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [file, text] : a) EXPECT_EQ(text, b.at(file)) << name << ": " << file << " differs";
}

}  // namespace

TEST(Cli, SynthIsReproducible) {
  expect_reproducible("synth", "synth " + ws().common(),
                      {"traditional.csv", "bidding.csv", "portfolio.csv", "synth_summary.txt"});
}

TEST(Cli, IngestIsReproducible) {
  expect_reproducible("ingest", "ingest " + ws().common(),
                      {"traditional_clean.csv", "traditional_encoded.csv", "bidding_drops.txt", "ingest_summary.txt"});
}

TEST(Cli, AnalyzeGradesIsReproducible) {
  expect_reproducible("grades", "analyze-grades " + ws().common(),
                      {"grade_means.csv", "grade_tests.csv", "grade_summary.txt"});
}

TEST(Cli, CvIsReproducible) {
  expect_reproducible("cv", "cv --task success --model logit " + ws().common(),
                      {"cv_success.csv", "cv_success_features.csv", "cv_success_summary.txt", "cv_success_confusion.csv"});
}

TEST(Cli, CvAllModels) {
  expect_reproducible("cv_all", "cv --task bid-rate --model all --select forward " + ws().common(),
                      {"cv_bid-rate.csv", "cv_bid-rate_features.csv"});
}

TEST(Cli, SelectIsReproducible) {
  expect_reproducible("select", "select --task bid-rate --model linear --select backward " + ws().common(),
                      {"selection_bid-rate.txt", "selection_bid-rate.csv"});
}

TEST(Cli, TrainRecommendPortfolioSweep) {
  const std::string bundle = ws().dir + "/bundle";
  fs::remove_all(bundle);
  const Outcome train = run_cli("train " + ws().common() + " --out " + ws().dir + "/train --bundle " + bundle);
  ASSERT_EQ(train.code, 0) << train.output;
  EXPECT_TRUE(fs::exists(bundle + "/bundle.json"));
  const std::string input = ws().dir + "/corpus/portfolio.csv";
  expect_reproducible("recommend", "recommend --bundle " + bundle + " --input " + input,
                      {"recommendations.csv", "recommendations.json"});
  expect_reproducible("portfolio", "portfolio " + ws().common() + " --bundle " + bundle + " --input " + input,
                      {"portfolio.csv", "portfolio_recommendations.csv"});
  expect_reproducible("sweep", "sweep-sentiment " + ws().common() + " --bundle " + bundle,
                      {"sweep.csv", "uplift.csv", "sweep_summary.txt"});
  expect_reproducible("train_again", "train " + ws().common(), {"train_summary.txt", "bundle/bundle.json"});
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("cv").code, 2);  // --task missing
  EXPECT_EQ(run_cli("cv --task success --model tree " + ws().common()).code, 2);
  EXPECT_EQ(run_cli("cv --task nothing " + ws().common()).code, 2);
  EXPECT_EQ(run_cli("cv --task success --seed -4 " + ws().common()).code, 2);
  EXPECT_EQ(run_cli("ingest --grid-step 0.03 " + ws().common()).code, 2);
  EXPECT_EQ(run_cli("analyze-grades --out " + ws().dir + "/x").code, 2);  // no tables given
  EXPECT_EQ(run_cli("serve --bundle " + ws().dir + "/bundle --bind nowhere").code, 2);
}

TEST(Cli, DataErrorsExitOne) {
  const Outcome missing = run_cli("ingest " + ws().common() + " --traditional /nonexistent.csv --out " + ws().dir + "/y");
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.output.find("/nonexistent.csv"), std::string::npos);
  EXPECT_EQ(run_cli("recommend --bundle /nonexistent --input /nonexistent.csv").code, 1);
}

TEST(Cli, HelpExitsZero) {
  const Outcome o = run_cli("--help");
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.output.find("sweep-sentiment"), std::string::npos);
}
