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
#include "nucseg/schedules.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

namespace nucseg {
namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TEST(LrSweepTest, EndpointsAndRatio) {
  const LrFinderConfig cfg;
  const auto lrs = lr_sweep(cfg);
  ASSERT_EQ(lrs.size(), 100u);
  EXPECT_EQ(lrs.front(), 1e-7);
  EXPECT_EQ(lrs.back(), 10.0);
  const double r = lrs[1] / lrs[0];
  for (std::size_t i = 1; i + 1 < lrs.size(); ++i) {
    EXPECT_LT(rel(lrs[i] / lrs[i - 1], r), 1e-12) << i;
  }
  LrFinderConfig two;
  two.steps = 2;
  EXPECT_EQ(lr_sweep(two), (std::vector<double>{1e-7, 10.0}));
  two.steps = 1;
  EXPECT_THROW(lr_sweep(two), Error);
}

TEST(LrFindTest, DecreasingLossesPickLastPoint) {
  const LrFinderConfig cfg;
  std::vector<double> losses;
  for (int i = 0; i < cfg.steps; ++i) losses.push_back(5.0 - 0.04 * i);
  const LrFindResult r = lr_find(losses, cfg);
  EXPECT_EQ(r.stop_index, losses.size());
  EXPECT_EQ(r.suggested_lr, 10.0 / 10.0);
}

TEST(LrFindTest, ValleySuggestion) {
  const LrFinderConfig cfg;
  const auto lrs = lr_sweep(cfg);
  std::vector<double> losses;
  for (double lr : lrs) losses.push_back(oracle::valley_loss(lr));
  const LrFindResult r = lr_find(losses, cfg);
  const double step = lrs[1] / lrs[0];
  EXPECT_GE(r.suggested_lr, 1e-2 / step);
  EXPECT_LE(r.suggested_lr, 1e-2 * step);
  // The minimum is taken over the smoothed curve up to the stop.
  const auto s = oracle::smoothed(losses, cfg.beta);
  for (std::size_t i = 0; i < r.stop_index; ++i) EXPECT_GE(s[i], s[r.min_index] - 1e-12);
}

TEST(LrFindTest, JumpWithoutSmoothingStopsAtJump) {
  LrFinderConfig cfg;
  cfg.beta = 0.0;
  for (std::size_t k : {1u, 5u, 40u, 99u}) {
    std::vector<double> losses(100, 1.0);
    for (std::size_t i = 0; i < k; ++i) losses[i] = 2.0 - 0.01 * static_cast<double>(i);
    const double best = *std::min_element(losses.begin(), losses.begin() + k);
    for (std::size_t i = k; i < losses.size(); ++i) losses[i] = 10.0 * best;
    EXPECT_EQ(lr_find(losses, cfg).stop_index, k);
  }
}

TEST(LrFindTest, JumpWithSmoothingMatchesOracle) {
  const LrFinderConfig cfg;
  for (std::size_t k : {3u, 20u, 60u}) {
    std::vector<double> losses(100, 1.0);
    for (std::size_t i = k; i < losses.size(); ++i) losses[i] = 10.0;
    const auto s = oracle::smoothed(losses, cfg.beta);
    std::size_t expected = losses.size();
    double best = s[0];
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i] > cfg.divergence_factor * best) {
        expected = i;
        break;
      }
      best = std::min(best, s[i]);
    }
    const LrFindResult r = lr_find(losses, cfg);
    ASSERT_LT(expected, losses.size()) << "jump never detected for k=" << k;
    EXPECT_EQ(r.stop_index, expected);
    EXPECT_GE(r.stop_index, k);
  }
}

TEST(LrFindTest, NonFiniteLossStops) {
  const LrFinderConfig cfg;
  std::vector<double> losses(30, 1.0);
  losses[12] = std::nan("");
  EXPECT_EQ(lr_find(losses, cfg).stop_index, 12u);
  losses[0] = INFINITY;
  EXPECT_THROW(lr_find(losses, cfg), Error);
}

TEST(LrFindTest, AppendingAfterDivergenceChangesNothing) {
  LrFinderConfig cfg;
  cfg.beta = 0.5;
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> losses;
    for (int i = 0; i < 50; ++i) losses.push_back(1.0 + rng.uniform());
    losses.push_back(1000.0);
    const LrFindResult a = lr_find(losses, cfg);
    ASSERT_LT(a.stop_index, losses.size());
    for (int i = 0; i < 20; ++i) losses.push_back(rng.uniform(0.0, 5000.0));
    const LrFindResult b = lr_find(losses, cfg);
    EXPECT_EQ(a.stop_index, b.stop_index);
    EXPECT_EQ(a.suggested_lr, b.suggested_lr);
  }
}

TEST(OneCycleTest, Anchors) {
  OneCycleConfig cfg;
  cfg.lr_max = 1e-2;
  cfg.total_steps = 1000;
  const auto v = one_cycle(cfg);
  ASSERT_EQ(v.size(), 1001u);
  const std::size_t peak = 300;
  EXPECT_LT(rel(v.front().lr, 4e-4), 1e-9);
  EXPECT_LT(rel(v[peak].lr, 1e-2), 1e-9);
  EXPECT_LT(rel(v.back().lr, 4e-8), 1e-9);
  EXPECT_LT(rel(v.front().momentum, 0.95), 1e-9);
  EXPECT_LT(rel(v[peak].momentum, 0.85), 1e-9);
  EXPECT_LT(rel(v.back().momentum, 0.95), 1e-9);
  for (const auto& s : v) {
    EXPECT_LE(s.lr, 1e-2 * (1 + 1e-12));
    EXPECT_GE(s.momentum, 0.85 - 1e-12);
    EXPECT_LE(s.momentum, 0.95 + 1e-12);
  }
}

TEST(OneCycleTest, UnimodalWithMirroredMomentum) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    OneCycleConfig cfg;
    cfg.lr_max = std::pow(10.0, rng.uniform(-6, 0));
    cfg.total_steps = 2 + static_cast<int>(rng.below(3000));
    cfg.pct_start = rng.uniform(0.05, 0.95);
    const auto v = one_cycle(cfg);
    const std::size_t peak =
        static_cast<std::size_t>(std::max_element(v.begin(), v.end(), [](auto& a, auto& b) {
                                   return a.lr < b.lr;
                                 }) - v.begin());
    EXPECT_EQ(peak, static_cast<std::size_t>(std::floor(cfg.pct_start * cfg.total_steps)));
    for (std::size_t t = 1; t < v.size(); ++t) {
      if (t <= peak) {
        ASSERT_GE(v[t].lr, v[t - 1].lr);
        ASSERT_LE(v[t].momentum, v[t - 1].momentum);
      } else {
        ASSERT_LE(v[t].lr, v[t - 1].lr);
        ASSERT_GE(v[t].momentum, v[t - 1].momentum);
      }
    }
  }
}

TEST(OneCycleTest, Continuity) {
  OneCycleConfig cfg;
  cfg.total_steps = 10000;
  const auto v = one_cycle(cfg);
  double max_jump = 0;
  for (std::size_t t = 1; t < v.size(); ++t) max_jump = std::max(max_jump, std::abs(v[t].lr - v[t - 1].lr));
  // Steepest slope of a half-cosine over 3000 steps is pi/2 * range / 3000.
  EXPECT_LE(max_jump, 1.58 * cfg.lr_max / 3000);
}

TEST(OneCycleTest, ZeroLrAndValidation) {
  OneCycleConfig cfg;
  cfg.lr_max = 0;
  for (const auto& s : one_cycle(cfg)) EXPECT_EQ(s.lr, 0.0);
  cfg.lr_max = -1;
  EXPECT_THROW(one_cycle(cfg), Error);
  cfg.lr_max = 1e-3;
  cfg.pct_start = 1.0;
  EXPECT_THROW(one_cycle(cfg), Error);
}

TEST(OneCycleTest, PointsCount) {
  OneCycleConfig cfg;
  for (std::size_t n : {1u, 2u, 3u, 17u, 500u}) EXPECT_EQ(one_cycle_points(cfg, n).size(), n);
  const auto pts = one_cycle_points(cfg, 101);
  cfg.total_steps = 100;
  EXPECT_EQ(pts, one_cycle(cfg));
}

TEST(ProgressivePlanTest, Defaults) {
  const StagePlan plan = progressive_plan(1600, 1200);
  ASSERT_EQ(plan.stages.size(), 3u);
  EXPECT_EQ(plan.stages[0].width, 400);
  EXPECT_EQ(plan.stages[1].width, 800);
  EXPECT_EQ(plan.stages[1].height, 600);
  EXPECT_EQ(plan.stages[2].width, 1600);
  EXPECT_EQ(plan.stages[0].batch, 16);
  EXPECT_EQ(plan.stages[0].lr_max, 1e-2);
  EXPECT_EQ(plan.stages[1].batch, 4);
  EXPECT_EQ(plan.stages[1].lr_max, 1e-4);
  EXPECT_EQ(plan.stages[2].batch, 1);
  EXPECT_EQ(plan.stages[2].lr_max, 1e-5);
  EXPECT_EQ(plan.total_epochs(), 45);
  for (const auto& s : plan.stages) EXPECT_EQ(s.weight_decay, 1e-3);
}

TEST(ProgressivePlanTest, SingleStageAndOverrides) {
  const StagePlan one = progressive_plan(1600, 1200, 1);
  ASSERT_EQ(one.stages.size(), 1u);
  EXPECT_EQ(one.stages[0].width, 1600);
  EXPECT_EQ(one.stages[0].scale, 1.0);

  PlanOverrides o;
  o.lr_max = std::vector<double>{3e-3};
  o.batches = std::vector<int>{8, 2};
  o.frozen_epochs = 1;
  const StagePlan p = progressive_plan(400, 300, 2, o);
  EXPECT_EQ(p.stages[0].lr_max, 3e-3);
  EXPECT_EQ(p.stages[1].batch, 2);
  EXPECT_EQ(p.total_epochs(), 22);

  EXPECT_THROW(progressive_plan(1601, 1200), Error);
  o.batches = std::vector<int>{1, 2, 3};
  EXPECT_THROW(progressive_plan(400, 300, 2, o), Error);
}

TEST(ProgressivePlanTest, StageStepsAreTwoCycles) {
  StagePlan plan = progressive_plan(400, 300);
  attach_one_cycle(plan, 7);
  for (const auto& s : plan.stages) {
    ASSERT_EQ(s.steps.size(), static_cast<std::size_t>(15 * 7));
    OneCycleConfig cfg;
    cfg.lr_max = s.lr_max;
    const auto frozen = one_cycle_points(cfg, 35);
    const auto unfrozen = one_cycle_points(cfg, 70);
    EXPECT_TRUE(std::equal(frozen.begin(), frozen.end(), s.steps.begin()));
    EXPECT_TRUE(std::equal(unfrozen.begin(), unfrozen.end(), s.steps.begin() + 35));
  }
}

TEST(PlanJsonTest, RoundTripIsExact) {
  StagePlan plan = progressive_plan(1600, 1200);
  attach_one_cycle(plan, 13);
  const std::string text = plan_to_json(plan);
  const StagePlan back = plan_from_json(text);
  EXPECT_EQ(back, plan);
  EXPECT_EQ(plan_to_json(back), text);
}

TEST(PlanJsonTest, Rejects) {
  EXPECT_THROW(plan_from_json("{"), Error);
  EXPECT_THROW(plan_from_json(R"({"stages": []})"), Error);
  EXPECT_THROW(plan_from_json(R"({"format_version": 2, "stages": []})"), Error);
  EXPECT_THROW(plan_from_json(R"({"stages": [{"width": 4}]})"), Error);
}

}  // namespace
}  // namespace nucseg
