/* Copyright 2026 The nucseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "nucseg/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "nucseg/config.hpp"
#include "nucseg/file_util.hpp"
#include "nucseg/image_io.hpp"
#include "nucseg/schedules.hpp"

namespace nucseg {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nucseg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv(kConfigEnvVar);
  }
  void TearDown() override {
    unsetenv(kConfigEnvVar);
    fs::remove_all(dir_);
  }
  std::string path(const std::string& rel) const { return (dir_ / rel).string(); }
  fs::path dir_;
};

TEST_F(CliTest, NoArgumentsIsUsage) {
  const Result r = run_cli({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("pipeline"), std::string::npos);
}

TEST_F(CliTest, UnknownSubcommandIsUsage) {
  const Result r = run_cli({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error class=Usage"), std::string::npos);
}

TEST_F(CliTest, Version) {
  const Result r = run_cli({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(kToolkitVersion), std::string::npos);
  EXPECT_NE(r.out.find("schedule format 1"), std::string::npos);
}

TEST_F(CliTest, InvalidConfigExitsThree) {
  write_file_atomic(path("bad.json"), R"({"split": {"train": 0.9, "val": 0.2, "test": 0.1}})");
  EXPECT_EQ(run_cli({"--config", path("bad.json"), "split", "--dir", path("ds")}).code, 3);
  write_file_atomic(path("broken.json"), "{ nope");
  EXPECT_EQ(run_cli({"--config", path("broken.json"), "split", "--dir", path("ds")}).code, 3);
  EXPECT_EQ(run_cli({"postprocess", "--in", path("x"), "--out", path("y"), "--threshold", "abc"}).code, 3);
  EXPECT_EQ(run_cli({"postprocess", "--in", path("x"), "--out", path("y"), "--open-size", "4"}).code, 3);
}

TEST_F(CliTest, MissingInputExitsFour) {
  const Result r = run_cli({"rasterize", "--ann", path("absent.json"), "--out", path("m.png")});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("error class=MissingInput"), std::string::npos);
  EXPECT_EQ(run_cli({"--config", path("absent.json"), "split", "--dir", path("ds")}).code, 4);
  EXPECT_EQ(run_cli({"evaluate", "--dataset", path("ds"), "--pred", path("p"), "--report", path("r.csv")}).code, 4);
}

TEST_F(CliTest, RasterizeWritesMask) {
  write_file_atomic(path("a.json"), R"({"imageWidth": 20, "imageHeight": 10,
      "shapes": [{"label": "n", "points": [[2, 2], [12, 2], [12, 7], [2, 7]]}]})");
  const Result r = run_cli({"rasterize", "--ann", path("a.json"), "--out", path("m.png")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_png_mask(path("m.png")).count(), 50u);
  write_file_atomic(path("bad.json"), R"({"imageWidth": 20, "imageHeight": 10,
      "shapes": [{"points": [[2, 2], [12, 2]]}]})");
  const Result bad = run_cli({"rasterize", "--ann", path("bad.json"), "--out", path("m2.png")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("degenerate polygon at index 0"), std::string::npos);
}

TEST_F(CliTest, TileWritesManifest) {
  RasterImage img(50, 30, Rgb{1, 2, 3});
  img.set(49, 29, {9, 9, 9});
  write_png(path("big.png"), img);
  const Result r = run_cli({"tile", "--input", path("big.png"), "--tile-width", "20",
                            "--tile-height", "15", "--policy", "pad", "--out-dir", path("tiles")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(path("tiles/manifest.csv")),
            "row0_col0.png,0,0,0,0\nrow0_col1.png,0,1,20,0\nrow0_col2.png,0,2,40,0\n"
            "row1_col0.png,1,0,0,15\nrow1_col1.png,1,1,20,15\nrow1_col2.png,1,2,40,15\n");
  EXPECT_EQ(read_png_rgb(path("tiles/row1_col2.png")).at(19, 14), (Rgb{9, 9, 9}));
}

TEST_F(CliTest, ConfigFileAndEnvironmentPrecedence) {
  write_png(path("big.png"), RasterImage(40, 40));
  write_file_atomic(path("cfg.json"), R"({"tile": {"width": 10, "height": 10}})");
  setenv(kConfigEnvVar, path("cfg.json").c_str(), 1);
  Result r = run_cli({"tile", "--input", path("big.png"), "--out-dir", path("t1")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "tiles=16\n");
  // A flag beats the config document.
  r = run_cli({"tile", "--input", path("big.png"), "--tile-width", "20", "--out-dir", path("t2")});
  EXPECT_EQ(r.out, "tiles=8\n");
}

TEST_F(CliTest, ConfigJsonRoundTrip) {
  PipelineConfig cfg;
  cfg.tile_width = 800;
  cfg.lr_max = std::vector<double>{1e-3, 1e-4, 1e-5};
  cfg.postprocess.blur_sigma = 1.5;
  cfg.lr_find = false;
  const PipelineConfig back = config_from_json(config_to_json(cfg));
  EXPECT_EQ(config_to_json(back), config_to_json(cfg));
}

TEST_F(CliTest, ScheduleAndLrfind) {
  Result r = run_cli({"schedule", "--steps", "4", "--base-width", "1600", "--base-height",
                      "1200", "--out", path("plan.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const StagePlan plan = plan_from_json(read_file(path("plan.json")));
  ASSERT_EQ(plan.stages.size(), 3u);
  EXPECT_EQ(plan.stages[1].width, 800);
  EXPECT_EQ(plan.stages[2].steps.size(), 60u);

  std::string csv = "lr,loss\n";
  const auto lrs = lr_sweep(LrFinderConfig{});
  for (std::size_t i = 0; i < lrs.size(); ++i) {
    csv += std::to_string(lrs[i]) + "," + std::to_string(5.0 - 0.01 * static_cast<double>(i)) + "\n";
  }
  write_file_atomic(path("losses.csv"), csv);
  r = run_cli({"lrfind", "--losses", path("losses.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"suggested_lr\":1.0"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\"stop_index\":100"), std::string::npos) << r.out;
}

TEST_F(CliTest, StageCommandsChain) {
  const std::string ds = path("ds");
  ASSERT_EQ(run_cli({"synth", "--count", "8", "--seed", "3", "--out-dir", ds, "--width", "64",
                     "--height", "64"}).code, 0);
  ASSERT_EQ(run_cli({"split", "--seed", "3", "--dir", ds}).code, 0);
  ASSERT_EQ(run_cli({"schedule", "--steps", "6", "--base-width", "64", "--base-height", "64",
                     "--frozen-epochs", "1", "--unfrozen-epochs", "1", "--lr-max", "0.5",
                     "--out", path("plan.json")}).code, 0);
  Result r = run_cli({"train-baseline", "--dataset", ds, "--plan", path("plan.json"), "--seed",
                      "3", "--out", path("w.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run_cli({"predict", "--weights", path("w.json"), "--dataset", ds, "--out-dir", path("pred")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t probmaps = 0;
  for (const auto& e : fs::directory_iterator(path("pred"))) probmaps += e.path().extension() == ".png";
  EXPECT_EQ(probmaps, 1u);  // round(0.15 * 8) = 1 test id
  r = run_cli({"postprocess", "--in", path("pred"), "--out", path("masks")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run_cli({"evaluate", "--dataset", ds, "--pred", path("pred"), "--report", path("r/report.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mean_iou="), std::string::npos);
  EXPECT_TRUE(fs::exists(path("r/report.json")));
  r = run_cli({"evaluate", "--masks", "--dataset", ds, "--pred", path("masks"), "--report",
               path("r/masks.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  // Post-processing inside evaluate equals running it as a separate stage.
  EXPECT_EQ(read_file(path("r/report.csv")), read_file(path("r/masks.csv")));

  const std::string img = (ds / fs::path("images") / "synth_0000.png").string();
  r = run_cli({"predict", "--weights", path("w.json"), "--image", img, "--out", path("one.png")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run_cli({"overlay", "--image", img, "--mask", (ds / fs::path("masks") / "synth_0000.png").string(),
               "--out", path("ov.png")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_png_rgb(path("ov.png")).width(), 64);
}

TEST_F(CliTest, PipelineIsDeterministic) {
  const std::vector<std::string> common = {"pipeline", "--synthetic", "10", "--seed", "5",
                                           "--frozen-epochs", "1", "--unfrozen-epochs", "1"};
  auto a = common;
  a.insert(a.end(), {"--work-dir", path("a")});
  auto b = common;
  b.insert(b.end(), {"--work-dir", path("b"), "--threads", "3"});
  const Result ra = run_cli(a);
  ASSERT_EQ(ra.code, 0) << ra.err;
  const Result rb = run_cli(b);
  ASSERT_EQ(rb.code, 0) << rb.err;
  EXPECT_EQ(read_file(path("a/reports/report.csv")), read_file(path("b/reports/report.csv")));
  EXPECT_EQ(read_file(path("a/weights.json")), read_file(path("b/weights.json")));
}

TEST(ImageIoTest, RoundTripsAndMaskValidation) {
  const fs::path dir = fs::temp_directory_path() / "nucseg_io_test";
  fs::remove_all(dir);
  RasterImage img(5, 4);
  for (std::size_t i = 0; i < img.data().size(); ++i) img.data()[i] = static_cast<std::uint8_t>(i * 11);
  write_png(dir / "rgb.png", img);
  EXPECT_EQ(read_png_rgb(dir / "rgb.png"), img);
  EXPECT_EQ(read_png_gray(dir / "rgb.png"), to_grayscale(img));
  ProbMap pm(3, 3, 77);
  write_png(dir / "pm.png", pm);
  EXPECT_EQ(read_png_prob(dir / "pm.png"), pm);
  try {
    read_png_mask(dir / "pm.png");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
  }
  try {
    read_png_rgb(dir / "absent.png");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingInput);
  }
  write_file_atomic(dir / "junk.png", "not a png");
  EXPECT_THROW(read_png_rgb(dir / "junk.png"), Error);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace nucseg
