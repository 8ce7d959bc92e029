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

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nucseg {

// ---------------------------------------------------------------------------
// Learning-rate range test
// ---------------------------------------------------------------------------

struct LrFinderConfig {
  double lr_min = 1e-7;
  double lr_max = 10.0;
  int steps = 100;
  double beta = 0.98;               // loss smoothing
  double divergence_factor = 4.0;   // stop once smoothed > factor * best
  double suggestion_divisor = 10.0; // "a bit before" the minimum

  void validate() const;
};

/// lr_i = lr_min * (lr_max / lr_min)^(i / (steps - 1)); endpoints are exact.
std::vector<double> lr_sweep(const LrFinderConfig& cfg);

/// Bias-corrected exponential smoothing with divergence detection. Shared by
/// lr_find and by trainers that run the sweep live and need to know when to
/// stop early.
class DivergenceMonitor {
 public:
  DivergenceMonitor(double beta, double factor) : beta_(beta), factor_(factor) {}

  /// Feeds loss i; returns true if point i diverged (or is not finite).
  bool push(double loss);

  const std::vector<double>& smoothed() const { return smoothed_; }
  double best() const { return best_; }

 private:
  double beta_;
  double factor_;
  double average_ = 0.0;
  double best_ = 0.0;
  std::vector<double> smoothed_;
};

struct LrFindResult {
  double suggested_lr = 0.0;
  /// Index of the first diverged point, or losses.size() if none diverged.
  std::size_t stop_index = 0;
  std::size_t min_index = 0;
  std::vector<double> smoothed;
};

/// losses[i] pairs with lr_sweep(cfg)[i]; a truncated sweep is allowed.
/// Suggestion = lr at the smoothed-loss minimum (before the stop) / divisor.
/// Throws kInvalidArgument for fewer than 2 points or more than cfg.steps.
LrFindResult lr_find(std::span<const double> losses, const LrFinderConfig& cfg);

// ---------------------------------------------------------------------------
// One-cycle policy
// ---------------------------------------------------------------------------

struct OneCycleConfig {
  double lr_max = 1e-2;
  int total_steps = 100;
  double pct_start = 0.3;
  double div_start = 25.0;
  double div_final = 2.5e5;
  double momentum_high = 0.95;
  double momentum_low = 0.85;
  double weight_decay = 1e-3;

  void validate() const;
};

struct StepValue {
  double lr;
  double momentum;

  bool operator==(const StepValue&) const = default;
};

/// Values at t = 0..T (T + 1 points, T = total_steps). Warm-up cosine from
/// lr_max/div_start to lr_max over [0, floor(pct_start*T)], then cosine down
/// to lr_max/div_final at T; momentum mirrors it between high and low.
std::vector<StepValue> one_cycle(const OneCycleConfig& cfg);

/// Exactly n points of a one-cycle curve: the full curve with T = n - 1 when
/// n >= 3, otherwise the first n points of the T = 2 curve.
std::vector<StepValue> one_cycle_points(OneCycleConfig cfg, std::size_t n);

// ---------------------------------------------------------------------------
// Progressive resizing plan
// ---------------------------------------------------------------------------

struct Stage {
  int width = 0;
  int height = 0;
  double scale = 1.0;
  int batch = 1;
  int frozen_epochs = 5;
  int unfrozen_epochs = 10;
  double lr_max = 1e-2;
  double weight_decay = 1e-3;
  /// 0 until per-step values are attached.
  int steps_per_epoch = 0;
  /// Frozen part followed by unfrozen part, each its own one-cycle curve.
  std::vector<StepValue> steps;

  int frozen_steps() const { return frozen_epochs * steps_per_epoch; }
  bool operator==(const Stage&) const = default;
};

struct OneCycleShape {
  double pct_start = 0.3;
  double div_start = 25.0;
  double div_final = 2.5e5;
  double momentum_high = 0.95;
  double momentum_low = 0.85;

  bool operator==(const OneCycleShape&) const = default;
};

struct StagePlan {
  std::vector<Stage> stages;
  OneCycleShape curve;

  int total_epochs() const;
  bool operator==(const StagePlan&) const = default;
};

struct PlanOverrides {
  std::optional<std::vector<int>> batches;
  std::optional<std::vector<double>> lr_max;
  std::optional<int> frozen_epochs;
  std::optional<int> unfrozen_epochs;
  std::optional<double> weight_decay;
};

/// Stages at scales 1/2^(stages-1) ... 1/2, 1. Defaults follow the standard
/// three-stage recipe, keyed by scale: 1/4 -> batch 16, lr 1e-2;
/// 1/2 -> batch 4, lr 1e-4; 1 -> batch 1, lr 1e-5. Throws kInvalidArgument
/// when the base size is not divisible by 2^(stages-1).
StagePlan progressive_plan(int base_w, int base_h, int stages = 3,
                           const PlanOverrides& overrides = {});

/// Fills steps_per_epoch and the per-step lr/momentum of every stage.
void attach_one_cycle(StagePlan& plan, int steps_per_epoch);

/// The per-step values one stage should carry for a given steps_per_epoch.
std::vector<StepValue> stage_steps(const Stage& stage, const OneCycleShape& curve,
                                   int steps_per_epoch);

std::string plan_to_json(const StagePlan& plan);
StagePlan plan_from_json(const std::string& text);

}  // namespace nucseg
