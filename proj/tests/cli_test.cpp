// Copyright 2026 The HYSP Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "hysp/config.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

/// Runs hysp_lab with stderr folded into stdout.
Result lab(const std::string& args) {
  const std::string cmd = std::string(HYSP_LAB_BIN) + " " + args + " 2>&1";
  Result r;
  std::FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) / ("cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "tiny.json") << R"({"trainer": {"epochs": 2, "batch_size": 8},
      "data": {"n_per_class": 6, "frames": 10}, "model": {"hidden": 8, "dim": 8},
      "objectives": {"e1": 1, "e2": 2}, "probe": {"epochs": 10}})";
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string tiny() const { return "--config " + path("tiny.json"); }

  fs::path dir_;
};

TEST_F(Cli, NoArgumentsPrintsUsageAndExitsTwo) {
  const auto r = lab("");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("pretrain"), std::string::npos);
}

TEST_F(Cli, UnknownSubcommandOrFlagExitsTwo) {
  EXPECT_EQ(lab("frobnicate").code, 2);
  EXPECT_EQ(lab("pretrain --no-such-flag").code, 2);
  EXPECT_EQ(lab("pretrain --preset huge").code, 2);
}

TEST_F(Cli, GradcheckPassesOnCorrectBuild) {
  const auto r = lab("gradcheck --seeds 2 --pairs 50 --out " + path("gc"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("riemannian_closed_form"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, PretrainTwiceWithSameSeedGivesIdenticalMetrics) {
  ASSERT_EQ(lab("pretrain " + tiny() + " --seed 7 --out " + path("a")).code, 0);
  ASSERT_EQ(lab("pretrain " + tiny() + " --seed 7 --out " + path("b")).code, 0);
  const std::string a = slurp(dir_ / "a" / "metrics.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(hysp::content_hash(a), hysp::content_hash(slurp(dir_ / "b" / "metrics.csv")));
  EXPECT_EQ(slurp(dir_ / "a" / "checkpoint.hysp"), slurp(dir_ / "b" / "checkpoint.hysp"));
}

TEST_F(Cli, ManifestRecordsResolvedConfigAndSeed) {
  ASSERT_EQ(lab("generate " + tiny() + " --seed 3 --out " + path("g")).code, 0);
  const auto m = nlohmann::json::parse(slurp(dir_ / "g" / "manifest.json"));
  EXPECT_EQ(m["status"], "complete");
  EXPECT_EQ(m["seed"], 3);
  EXPECT_EQ(m["seed_source"], "flag");
  EXPECT_EQ(m["config"]["trainer"]["epochs"], 2);
  EXPECT_TRUE(m["inputs"].contains("config"));
  EXPECT_TRUE(fs::exists(dir_ / "g" / "dataset.hysd"));
  EXPECT_FALSE(fs::exists(dir_ / "g" / ".lock"));

  ASSERT_EQ(lab("generate " + tiny() + " --out " + path("h")).code, 0);
  const auto e = nlohmann::json::parse(slurp(dir_ / "h" / "manifest.json"));
  EXPECT_EQ(e["seed_source"], "entropy");
  EXPECT_EQ(e["config"]["trainer"]["seed"], e["seed"]);
}

TEST_F(Cli, ErrorsAreOneMachineParsableLine) {
  ASSERT_EQ(lab("pretrain " + tiny() + " --seed 1 --out " + path("p")).code, 0);
  const auto r = lab("probe " + tiny() + " --seed 1 --out " + path("q") + " --checkpoint " + path("p/checkpoint.hysp") +
                     " --label-fraction 1.5");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out.rfind("error: kind=InvalidInput msg=", 0), 0u) << r.out;
  EXPECT_EQ(r.out.find('\n'), r.out.size() - 1);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "q" / "manifest.json"))["status"], "failed");

  std::ofstream(path("bad.ckpt")) << "not a checkpoint";
  const auto c = lab("analyze " + tiny() + " --seed 1 --out " + path("r") + " --checkpoint " + path("bad.ckpt"));
  EXPECT_EQ(c.code, 1);
  EXPECT_EQ(c.out.rfind("error: kind=CorruptCheckpoint msg=", 0), 0u) << c.out;
}

TEST_F(Cli, LockedOutputDirectoryIsRefused) {
  fs::create_directories(dir_ / "locked");
  std::ofstream(dir_ / "locked" / ".lock") << "other";
  const auto r = lab("generate " + tiny() + " --seed 1 --out " + path("locked"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("kind=IoError"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "locked" / "manifest.json"));
}

TEST_F(Cli, BadThreadCapIsRejected) {
  const std::string cmd = "HYSP_LAB_THREADS=abc " + std::string(HYSP_LAB_BIN) + " generate " + tiny() +
                          " --seed 1 --out " + path("t3") + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 1);
}

TEST(CanonicalConfig, CheckedInDefaultsMatchDeskPreset) {
  const auto file = nlohmann::json::parse(slurp(fs::path(HYSP_SOURCE_DIR) / "configs" / "default.json"));
  EXPECT_EQ(file, hysp::to_json(hysp::preset("desk")));
}

}  // namespace
