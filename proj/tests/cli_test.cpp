#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "argen/datasets.hpp"
#include "test_support.hpp"

using argen::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

// Runs the CLI with stdout and stderr captured to a file.
Result cli(const std::string& args, const TempDir& scratch) {
  const auto log = scratch / "cli.log";
  const std::string cmd = "NO_NETWORK= \"" + std::string(ARGEN_CLI_PATH) + "\" " + args + " >\"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream s;
  s << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path example_dir() { return fs::path(ARGEN_SOURCE_DIR) / "data" / "example"; }

void copy_example(const TempDir& dir) {
  for (const auto& e : fs::directory_iterator(example_dir())) {
    if (e.is_regular_file()) fs::copy_file(e.path(), dir / e.path().filename().string());
  }
}

}  // namespace

TEST(Cli, ValidateExampleConfig) {
  TempDir dir;
  const auto r = cli("validate --config \"" + (example_dir() / "example.yaml").string() + "\"", dir);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("planned cells: 204"), std::string::npos) << r.out;
}

TEST(Cli, BadConfigExitsTwo) {
  TempDir dir;
  std::ofstream(dir / "bad.yaml") << "strategies: [ZS]\nbackends: []\n";
  auto r = cli("validate --config \"" + (dir / "bad.yaml").string() + "\"", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("ConfigError"), std::string::npos) << r.out;
  r = cli("run --config \"" + (dir / "missing.yaml").string() + "\"", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(cli("frobnicate", dir).code, 2);
  EXPECT_EQ(cli("run", dir).code, 2);
}

TEST(Cli, AugmentWritesItems) {
  TempDir dir;
  const auto in = (example_dir() / "mc.jsonl").string();
  auto r = cli("augment --in \"" + in + "\" --out \"" + (dir / "aug.jsonl").string() + "\" --count 2 --seed 5", dir);
  ASSERT_EQ(r.code, 0) << r.out;
  const auto items = argen::parse_items(slurp(dir / "aug.jsonl"));
  EXPECT_EQ(items.size(), 8u);
  EXPECT_TRUE(items.back().augmented);

  r = cli("augment --in \"" + (dir / "aug.jsonl").string() + "\" --out \"" + (dir / "again.jsonl").string() +
              "\" --fraction 0.5 --seed 5",
          dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("AlreadyAugmented"), std::string::npos) << r.out;
  EXPECT_EQ(cli("augment --in \"" + in + "\" --out x --fraction 0.1 --count 1 --seed 1", dir).code, 2);
}

TEST(Cli, RunReportInspect) {
  TempDir dir;
  copy_example(dir);
  auto r = cli("run --config \"" + (dir / "example.yaml").string() + "\"", dir);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("cells: 204/204 completed"), std::string::npos) << r.out;
  const auto out = dir / "out";
  ASSERT_TRUE(fs::exists(out / "transcripts.jsonl"));
  ASSERT_TRUE(fs::exists(out / "delta_gamma.csv"));

  r = cli("report --transcripts \"" + out.string() + "\" --out \"" + (dir / "again").string() + "\"", dir);
  ASSERT_EQ(r.code, 0) << r.out;
  for (const auto& e : fs::directory_iterator(dir / "again")) {
    EXPECT_EQ(slurp(e.path()), slurp(out / e.path().filename())) << e.path();
  }

  r = cli("run --config \"" + (dir / "example.yaml").string() + "\"", dir);
  EXPECT_NE(r.out.find("backend calls: 0, judge calls: 0"), std::string::npos) << r.out;

  r = cli("inspect --id mc-1 --transcripts \"" + out.string() + "\"", dir);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("[prompt]"), std::string::npos);
  EXPECT_NE(r.out.find("linen closet"), std::string::npos);

  r = cli("inspect --id no-such-item --transcripts \"" + out.string() + "\"", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("NotFound"), std::string::npos) << r.out;
  EXPECT_EQ(cli("report --transcripts \"" + (dir / "nowhere").string() + "\"", dir).code, 2);
}

TEST(Cli, CacheOnlyWithEmptyCacheIsPartial) {
  TempDir dir;
  copy_example(dir);
  const std::string cmd = "NO_NETWORK=1 \"" + std::string(ARGEN_CLI_PATH) + "\" run --config \"" +
                          (dir / "example.yaml").string() + "\" >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 1);
  EXPECT_TRUE(fs::exists(dir / "out" / "transcripts.jsonl"));
  EXPECT_FALSE(fs::exists(dir / "out" / "score_matrix.csv"));
}
