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
#include "nucseg/dataset.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "nucseg/image_io.hpp"
#include "oracles.hpp"

namespace nucseg {
namespace {

std::vector<std::string> make_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("img" + std::to_string(i));
  return ids;
}

TEST(SplitTest, LargeDatasetSizes) {
  const DatasetSplit s = split(make_ids(4753), 0);
  EXPECT_EQ(s.train.size(), 3327u);
  EXPECT_EQ(s.val.size(), 713u);
  EXPECT_EQ(s.test.size(), 713u);
}

TEST(SplitTest, HalfRoundsUp) {
  const DatasetSplit s = split(make_ids(10), 1);
  EXPECT_EQ(s.train.size(), 7u);
  EXPECT_EQ(s.val.size(), 2u);
  EXPECT_EQ(s.test.size(), 1u);
}

TEST(SplitTest, PartitionAndSizesForManyN) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(3000);
    const auto ids = make_ids(n);
    const DatasetSplit s = split(ids, rng.next());
    // Integer form of round-half-up for the 70/15 ratios.
    EXPECT_EQ(s.train.size(), (70 * n + 50) / 100) << n;
    EXPECT_EQ(s.val.size(), std::min(n - s.train.size(), (15 * n + 50) / 100)) << n;
    std::vector<std::string> all = s.train;
    all.insert(all.end(), s.val.begin(), s.val.end());
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    auto sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    ASSERT_EQ(all, sorted);
  }
}

TEST(SplitTest, DeterministicUnderSeed) {
  const auto ids = make_ids(200);
  const DatasetSplit a = split(ids, 42);
  const DatasetSplit b = split(ids, 42);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(split(ids, 43).train, a.train);
}

TEST(SplitTest, Errors) {
  EXPECT_THROW(split({}, 0), Error);
  EXPECT_THROW(split({"a", "a"}, 0), Error);
}

TEST(SplitTest, JsonRoundTrip) {
  const DatasetSplit s = split(make_ids(20), 0xfeedfacecafebeefULL);
  const DatasetSplit r = split_from_json(split_to_json(s));
  EXPECT_EQ(r.seed, s.seed);
  EXPECT_EQ(r.train, s.train);
  EXPECT_EQ(r.val, s.val);
  EXPECT_EQ(r.test, s.test);
  EXPECT_THROW(split_from_json("{"), Error);
}

RasterImage blob_image(int w, int h) {
  RasterImage img(w, h, Rgb{230, 200, 220});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.set(x, y, {static_cast<std::uint8_t>(x * 7), static_cast<std::uint8_t>(y * 5), 100});
    }
  }
  return img;
}

BinaryMask disc(int w, int h, double r) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = x + 0.5 - w / 2.0;
      const double dy = y + 0.5 - h / 2.0;
      m.set(x, y, dx * dx + dy * dy <= r * r);
    }
  }
  return m;
}

TEST(AugmentTest, ZeroProbabilitiesIsIdentity) {
  AugmentConfig cfg;
  cfg.flip_prob = 0;
  cfg.affine_prob = 0;
  cfg.lighting_prob = 0;
  const RasterImage img = blob_image(33, 21);
  const BinaryMask m = disc(33, 21, 7);
  Rng rng(1);
  for (int i = 0; i < 5; ++i) {
    auto [a, b] = augment(img, m, cfg, rng);
    EXPECT_EQ(a, img);
    EXPECT_EQ(b, m);
  }
}

TEST(AugmentTest, FlipIsInvolution) {
  AugmentParams p;
  p.flip = true;
  const RasterImage img = blob_image(30, 20);
  const BinaryMask m = disc(30, 20, 6);
  auto [a, b] = apply_augment(img, m, p);
  EXPECT_NE(a, img);
  EXPECT_EQ(a.at(0, 3), img.at(29, 3));
  auto [c, d] = apply_augment(a, b, p);
  EXPECT_EQ(c, img);
  EXPECT_EQ(d, m);
}

TEST(AugmentTest, RotationKeepsCentredBlobArea) {
  AugmentParams p;
  p.angle_deg = 10;
  const BinaryMask m = disc(64, 64, 16);
  auto [img, rotated] = apply_augment(blob_image(64, 64), m, p);
  const double before = static_cast<double>(m.count());
  EXPECT_LT(std::abs(static_cast<double>(rotated.count()) - before), 0.05 * before);
}

TEST(AugmentTest, LightingLeavesMaskAndGeometry) {
  AugmentParams p;
  p.brightness = 0.6;
  p.contrast = 1.2;
  const RasterImage img = blob_image(20, 20);
  const BinaryMask m = disc(20, 20, 5);
  auto [a, b] = apply_augment(img, m, p);
  EXPECT_EQ(b, m);
  // Brightness above 0.5 never darkens a pixel that is already mid-range.
  EXPECT_GT(a.at(10, 10)[2], img.at(10, 10)[2]);
}

TEST(AugmentTest, OutputsStayBinaryAndSized) {
  Rng rng(12);
  AugmentConfig cfg;
  cfg.affine_prob = 1.0;
  const RasterImage img = blob_image(40, 30);
  const BinaryMask m = disc(40, 30, 9);
  for (int i = 0; i < 20; ++i) {
    auto [a, b] = augment(img, m, cfg, rng);
    ASSERT_TRUE(same_size(a, img));
    ASSERT_TRUE(same_size(b, m));
    for (auto v : b.data()) ASSERT_TRUE(v == 0 || v == 255);
  }
}

TEST(AugmentTest, ParamDrawsAreDeterministicAndBounded) {
  AugmentConfig cfg;
  Rng a(5);
  Rng b(5);
  for (int i = 0; i < 200; ++i) {
    const AugmentParams p = draw_augment_params(cfg, a);
    const AugmentParams q = draw_augment_params(cfg, b);
    ASSERT_EQ(p.flip, q.flip);
    ASSERT_EQ(p.angle_deg, q.angle_deg);
    ASSERT_LE(std::abs(p.angle_deg), 10.0);
    ASSERT_GE(p.zoom, 1.0);
    ASSERT_LE(p.zoom, 1.1);
    ASSERT_GE(p.brightness, 0.4);
    ASSERT_LE(p.brightness, 0.6);
    ASSERT_GE(p.contrast, 0.8 - 1e-12);
    ASSERT_LE(p.contrast, 1.25 + 1e-12);
  }
  cfg.flip_prob = 1.5;
  EXPECT_THROW(draw_augment_params(cfg, a), Error);
}

TEST(NormalizeTest, Formula) {
  const RasterImage img(2, 2, Rgb{128, 128, 128});
  const auto planes = normalize(img);
  for (int c = 0; c < 3; ++c) {
    const double expected = (128.0 / 255.0 - kImagenetMean[c]) / kImagenetStd[c];
    EXPECT_NEAR(planes[c].at(1, 1), expected, 1e-12);
  }
  const auto passthrough = normalize(img, {0, 0, 0}, {1, 1, 1});
  EXPECT_DOUBLE_EQ(passthrough[0].at(0, 0), 128.0 / 255.0);
  const auto centred = normalize(RasterImage(1, 1, Rgb{51, 51, 51}), {0.2, 0.2, 0.2}, {0.5, 0.5, 0.5});
  EXPECT_NEAR(centred[0].at(0, 0), 0.0, 1e-15);
  EXPECT_THROW(normalize(img, kImagenetMean, {0, 1, 1}), Error);
}

TEST(SynthTest, EmptyRangeIsBackgroundOnly) {
  Rng rng(1);
  auto [img, mask] = synth_sample(rng, 64, 64, {0, 0});
  EXPECT_EQ(mask.count(), 0u);
}

TEST(SynthTest, ComponentCountWithinRange) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    auto [img, mask] = synth_sample(rng, 200, 150, {5, 5});
    const int cc = oracle::connected_components(mask, true);
    EXPECT_GE(cc, 1);
    EXPECT_LE(cc, 5);
    EXPECT_TRUE(same_size(img, mask));
  }
}

TEST(SynthTest, Deterministic) {
  Rng a(77);
  Rng b(77);
  auto [ia, ma] = synth_sample(a, 120, 80);
  auto [ib, mb] = synth_sample(b, 120, 80);
  EXPECT_EQ(ia, ib);
  EXPECT_EQ(ma, mb);
}

TEST(SynthTest, NucleiAreDarkerThanBackground) {
  Rng rng(3);
  auto [img, mask] = synth_sample(rng, 400, 300);
  double fg = 0, bg = 0;
  for (int y = 0; y < 300; ++y) {
    for (int x = 0; x < 400; ++x) {
      const Rgb p = img.at(x, y);
      (mask.test(x, y) ? fg : bg) += p[1];
    }
  }
  fg /= static_cast<double>(mask.count());
  bg /= 400.0 * 300.0 - static_cast<double>(mask.count());
  EXPECT_LT(fg + 50, bg);
  EXPECT_THROW(synth_sample(rng, 32, 32), Error);
}

TEST(DatasetLayoutTest, ListsImagesAndRoundTripsSplit) {
  const auto dir = std::filesystem::temp_directory_path() / "nucseg_dataset_test";
  std::filesystem::remove_all(dir);
  for (const char* id : {"b", "a", "c"}) {
    write_png(image_path(dir, id), RasterImage(4, 4));
    write_png(mask_path(dir, id), BinaryMask(4, 4));
  }
  EXPECT_EQ(list_dataset_ids(dir), (std::vector<std::string>{"a", "b", "c"}));
  const DatasetSplit s = split(list_dataset_ids(dir), 9);
  write_split(dir, s);
  EXPECT_EQ(read_split(dir).train, s.train);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(list_dataset_ids(dir), Error);
}

}  // namespace
}  // namespace nucseg
