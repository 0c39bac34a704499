// Copyright 2026 The mlsreenact Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the installed-style mlsr binary end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "../oracles.hpp"
#include "json.hpp"
#include "mlsr/image_io.hpp"
#include "mlsr/points_document.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kBinary = MLSR_BINARY;
const fs::path kFixtures = MLSR_FIXTURES;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    oracle::Rng rng(reinterpret_cast<std::uintptr_t>(this) ^ 0xc11);
    dir_ = fs::temp_directory_path() / ("mlsr_cli_" + std::to_string(rng.bits()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args, std::string* out = nullptr) {
    const fs::path log = dir_ / "stdout.txt";
    const std::string cmd = kBinary.string() + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (out != nullptr) *out = slurp(log);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string fixture(const std::string& name) const { return (kFixtures / name).string(); }
  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, IdentityWarpMatchesGolden) {
  ASSERT_EQ(run("warp --source " + fixture("source.png") + " --points " +
                fixture("identity_points.json") + " --out " + tmp("out.png") + " --no-timing"),
            0);
  EXPECT_EQ(slurp(tmp("out.png")), slurp(fixture("golden_identity.png")));
  const json stats = json::parse(slurp(tmp("out.png") + ".stats.json"));
  EXPECT_EQ(stats["width"], 256);
  EXPECT_FALSE(stats.contains("timing_ms"));
}

TEST_F(CliTest, ThreadCountDoesNotChangeOutput) {
  const std::string base = "warp --source " + fixture("source.png") + " --points " +
                           fixture("translate_points.json") + " --no-timing --out ";
  ASSERT_EQ(run("--threads 1 " + base + tmp("a.png")), 0);
  ASSERT_EQ(run("--threads 4 " + base + tmp("b.png")), 0);
  EXPECT_EQ(slurp(tmp("a.png")), slurp(tmp("b.png")));
  EXPECT_EQ(slurp(tmp("a.png") + ".stats.json"), slurp(tmp("b.png") + ".stats.json"));
}

TEST_F(CliTest, ExitCodes) {
  std::string out;
  EXPECT_EQ(run("warp --source " + fixture("source.png") + " --points " +
                    fixture("malformed_points.json") + " --out " + tmp("x.png"),
                &out),
            2);
  EXPECT_NE(out.find("line"), std::string::npos) << out;
  EXPECT_NE(out.find("column"), std::string::npos) << out;
  EXPECT_EQ(run("warp --source " + tmp("missing.png") + " --points " +
                fixture("identity_points.json") + " --out " + tmp("x.png")),
            4);
  mlsr::PointsDocument line = mlsr::PointsDocument::identity(3);
  line.source = line.driving = {{0.1, 0.1}, {0.5, 0.5}, {0.9, 0.9}};
  mlsr::save_points_document(line, tmp("line.json"));
  EXPECT_EQ(run("warp --source " + fixture("source.png") + " --points " + tmp("line.json") +
                " --out " + tmp("x.png")),
            3);
  EXPECT_EQ(run("warp --source " + fixture("source.png")), 2);
  EXPECT_EQ(run("warp --source " + fixture("source.png") + " --points " +
                fixture("identity_points.json") + " --out " + tmp("x.png") + " --mode nope"),
            2);
}

TEST_F(CliTest, OverridesAndFlowExport) {
  ASSERT_EQ(run("warp --source " + fixture("source.png") + " --points " +
                fixture("translate_points.json") + " --out " + tmp("s.png") +
                " --mode similarity --alpha 0.5 --size 32x24 --flow-out " + tmp("f.json")),
            0);
  const json stats = json::parse(slurp(tmp("s.png") + ".stats.json"));
  EXPECT_EQ(stats["mode"], "similarity");
  EXPECT_EQ(stats["alpha"], 0.5);
  EXPECT_EQ(stats["height"], 24);
  EXPECT_TRUE(stats.contains("timing_ms"));
  EXPECT_EQ(mlsr::read_png(tmp("s.png")).image.width(), 32);
  EXPECT_TRUE(fs::exists(tmp("f.json")));
}

TEST_F(CliTest, PerturbIsSeededAndDamped) {
  const std::string args = "perturb --source " + fixture("source.png") + " --points " +
                           fixture("translate_points.json") +
                           " --trials 20 --seed 3 --size 32 --out ";
  ASSERT_EQ(run(args + tmp("a.json")), 0);
  ASSERT_EQ(run("--threads 3 " + args + tmp("b.json")), 0);
  EXPECT_EQ(slurp(tmp("a.json")), slurp(tmp("b.json")));
  const json j = json::parse(slurp(tmp("a.json")));
  EXPECT_EQ(j["trials"].size(), 20u);
  EXPECT_EQ(j["summary"]["damped_fraction"], 1.0);
  EXPECT_TRUE(j.contains("metric"));
}

TEST_F(CliTest, PointsThenLoss) {
  ASSERT_EQ(run("points --source " + fixture("source.png") + " --driving " +
                fixture("source.png") + " --out " + tmp("p.json")),
            0);
  const mlsr::PointsDocument doc = mlsr::load_points_document(tmp("p.json"));
  EXPECT_EQ(doc.n(), 10u);
  std::string out;
  ASSERT_EQ(run("loss --points " + tmp("p.json") + " --lambda-m 2 --lambda-f 3", &out), 0);
  const json j = json::parse(out);
  EXPECT_TRUE(j.contains("total"));
  EXPECT_EQ(run("loss --points " + tmp("p.json") + " --lambda-m -1"), 2);
}

TEST_F(CliTest, AnimateWritesFramesAndFailures) {
  mlsr::TrackDocument track;
  track.source = {{0.1, 0.1}, {0.9, 0.1}, {0.5, 0.9}};
  track.frames = {track.source, {{0.1, 0.1}, {0.5, 0.5}, {0.9, 0.9}}};
  {
    std::ofstream f(tmp("track.json"));
    f << mlsr::to_json(track);
  }
  EXPECT_EQ(run("animate --source " + fixture("source.png") + " --track " + tmp("track.json") +
                " --out-dir " + tmp("frames") + " --size 16"),
            3);
  EXPECT_TRUE(fs::exists(dir_ / "frames" / "frame_0000.png"));
  EXPECT_TRUE(fs::exists(dir_ / "frames" / "failures.json"));
}

}  // namespace
