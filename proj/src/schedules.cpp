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

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nucseg/errors.hpp"

namespace nucseg {

void LrFinderConfig::validate() const {
  if (!(lr_min > 0.0 && lr_min < lr_max && std::isfinite(lr_max))) {
    fail(ErrorKind::kInvalidArgument, "lr finder bounds must satisfy 0 < lr_min < lr_max");
  }
  if (steps < 2) fail(ErrorKind::kInvalidArgument, "lr finder needs at least 2 steps");
  if (!(beta >= 0.0 && beta < 1.0)) {
    fail(ErrorKind::kInvalidArgument, "smoothing beta must lie in [0, 1)");
  }
  if (!(divergence_factor > 1.0)) {
    fail(ErrorKind::kInvalidArgument, "divergence factor must exceed 1");
  }
  if (!(suggestion_divisor > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "suggestion divisor must be positive");
  }
}

std::vector<double> lr_sweep(const LrFinderConfig& cfg) {
  cfg.validate();
  std::vector<double> lrs(cfg.steps);
  const double ratio = cfg.lr_max / cfg.lr_min;
  for (int i = 0; i < cfg.steps; ++i) {
    lrs[i] = cfg.lr_min * std::pow(ratio, static_cast<double>(i) / (cfg.steps - 1));
  }
  lrs.front() = cfg.lr_min;
  lrs.back() = cfg.lr_max;
  return lrs;
}

bool DivergenceMonitor::push(double loss) {
  if (!std::isfinite(loss)) {
    smoothed_.push_back(std::numeric_limits<double>::infinity());
    return true;
  }
  const std::size_t i = smoothed_.size();
  average_ = beta_ * average_ + (1.0 - beta_) * loss;
  const double s = average_ / (1.0 - std::pow(beta_, static_cast<double>(i + 1)));
  smoothed_.push_back(s);
  if (i > 0 && s > factor_ * best_) return true;
  if (i == 0 || s < best_) best_ = s;
  return false;
}

LrFindResult lr_find(std::span<const double> losses, const LrFinderConfig& cfg) {
  cfg.validate();
  if (losses.size() < 2) {
    fail(ErrorKind::kInvalidArgument, "lr_find needs at least 2 loss points");
  }
  if (losses.size() > static_cast<std::size_t>(cfg.steps)) {
    fail(ErrorKind::kInvalidArgument, "more losses than sweep steps");
  }
  const auto lrs = lr_sweep(cfg);
  DivergenceMonitor monitor(cfg.beta, cfg.divergence_factor);
  LrFindResult result;
  result.stop_index = losses.size();
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (monitor.push(losses[i])) {
      result.stop_index = i;
      break;
    }
  }
  result.smoothed = monitor.smoothed();
  if (result.stop_index == 0) {
    fail(ErrorKind::kNumeric, "lr_find: first loss is not finite");
  }
  const auto begin = result.smoothed.begin();
  result.min_index = static_cast<std::size_t>(
      std::min_element(begin, begin + static_cast<std::ptrdiff_t>(result.stop_index)) - begin);
  result.suggested_lr = lrs[result.min_index] / cfg.suggestion_divisor;
  return result;
}

void OneCycleConfig::validate() const {
  if (!(lr_max >= 0.0) || !std::isfinite(lr_max)) {
    fail(ErrorKind::kInvalidArgument, "one-cycle lr_max must be finite and non-negative");
  }
  if (total_steps < 2) fail(ErrorKind::kInvalidArgument, "one-cycle needs total_steps >= 2");
  if (!(pct_start > 0.0 && pct_start < 1.0)) {
    fail(ErrorKind::kInvalidArgument, "pct_start must lie in (0, 1)");
  }
  if (!(div_start > 1.0 && div_final > 1.0)) {
    fail(ErrorKind::kInvalidArgument, "div_start and div_final must exceed 1");
  }
  if (!(momentum_low <= momentum_high)) {
    fail(ErrorKind::kInvalidArgument, "momentum_low must not exceed momentum_high");
  }
}

namespace {

// Cosine interpolation from `from` (frac 0) to `to` (frac 1).
double cos_anneal(double from, double to, double frac) {
  return to + (from - to) * (1.0 + std::cos(std::numbers::pi * frac)) / 2.0;
}

}  // namespace

std::vector<StepValue> one_cycle(const OneCycleConfig& cfg) {
  cfg.validate();
  const int total = cfg.total_steps;
  const int peak = static_cast<int>(std::floor(cfg.pct_start * total));
  const double lr_start = cfg.lr_max / cfg.div_start;
  const double lr_end = cfg.lr_max / cfg.div_final;
  std::vector<StepValue> out(static_cast<std::size_t>(total) + 1);
  for (int t = 0; t <= total; ++t) {
    if (t <= peak) {
      const double frac = peak == 0 ? 1.0 : static_cast<double>(t) / peak;
      out[t] = {cos_anneal(lr_start, cfg.lr_max, frac),
                cos_anneal(cfg.momentum_high, cfg.momentum_low, frac)};
    } else {
      const double frac = static_cast<double>(t - peak) / (total - peak);
      out[t] = {cos_anneal(cfg.lr_max, lr_end, frac),
                cos_anneal(cfg.momentum_low, cfg.momentum_high, frac)};
    }
  }
  return out;
}

std::vector<StepValue> one_cycle_points(OneCycleConfig cfg, std::size_t n) {
  cfg.total_steps = static_cast<int>(std::max<std::size_t>(n, 3) - 1);
  auto points = one_cycle(cfg);
  points.resize(n);
  return points;
}

int StagePlan::total_epochs() const {
  int total = 0;
  for (const auto& s : stages) total += s.frozen_epochs + s.unfrozen_epochs;
  return total;
}

namespace {

struct StageDefaults {
  int batch;
  double lr_max;
};

StageDefaults defaults_for_level(int halvings) {
  switch (halvings) {
    case 0:
      return {1, 1e-5};
    case 1:
      return {4, 1e-4};
    default:
      return {16, 1e-2};
  }
}

}  // namespace

StagePlan progressive_plan(int base_w, int base_h, int stages, const PlanOverrides& overrides) {
  if (stages < 1) fail(ErrorKind::kInvalidArgument, "a plan needs at least one stage");
  if (base_w < 1 || base_h < 1) fail(ErrorKind::kInvalidArgument, "base size must be positive");
  const int divisor = 1 << (stages - 1);
  if (base_w % divisor != 0 || base_h % divisor != 0) {
    fail(ErrorKind::kInvalidArgument,
         "base size " + std::to_string(base_w) + "x" + std::to_string(base_h) +
             " is not divisible by " + std::to_string(divisor));
  }
  auto check_len = [stages](std::size_t n, const char* what) {
    if (n != 1 && n != static_cast<std::size_t>(stages)) {
      fail(ErrorKind::kInvalidArgument,
           std::string(what) + " override needs 1 or " + std::to_string(stages) + " values");
    }
  };
  if (overrides.batches) check_len(overrides.batches->size(), "batch");
  if (overrides.lr_max) check_len(overrides.lr_max->size(), "lr_max");

  StagePlan plan;
  for (int k = 0; k < stages; ++k) {
    const int halvings = stages - 1 - k;
    const StageDefaults d = defaults_for_level(halvings);
    Stage s;
    s.width = base_w >> halvings;
    s.height = base_h >> halvings;
    s.scale = 1.0 / (1 << halvings);
    s.batch = d.batch;
    s.lr_max = d.lr_max;
    if (overrides.batches) {
      const auto& v = *overrides.batches;
      s.batch = v.size() == 1 ? v[0] : v[k];
    }
    if (overrides.lr_max) {
      const auto& v = *overrides.lr_max;
      s.lr_max = v.size() == 1 ? v[0] : v[k];
    }
    if (overrides.frozen_epochs) s.frozen_epochs = *overrides.frozen_epochs;
    if (overrides.unfrozen_epochs) s.unfrozen_epochs = *overrides.unfrozen_epochs;
    if (overrides.weight_decay) s.weight_decay = *overrides.weight_decay;
    if (s.batch < 1) fail(ErrorKind::kInvalidArgument, "batch size must be positive");
    if (s.frozen_epochs < 0 || s.unfrozen_epochs < 0) {
      fail(ErrorKind::kInvalidArgument, "epoch counts must be non-negative");
    }
    if (!(s.lr_max >= 0.0) || !std::isfinite(s.lr_max)) {
      fail(ErrorKind::kInvalidArgument, "stage lr_max must be finite and non-negative");
    }
    plan.stages.push_back(std::move(s));
  }
  return plan;
}

std::vector<StepValue> stage_steps(const Stage& stage, const OneCycleShape& curve,
                                   int steps_per_epoch) {
  OneCycleConfig cfg;
  cfg.lr_max = stage.lr_max;
  cfg.pct_start = curve.pct_start;
  cfg.div_start = curve.div_start;
  cfg.div_final = curve.div_final;
  cfg.momentum_high = curve.momentum_high;
  cfg.momentum_low = curve.momentum_low;
  cfg.weight_decay = stage.weight_decay;
  std::vector<StepValue> steps;
  for (int epochs : {stage.frozen_epochs, stage.unfrozen_epochs}) {
    const auto n = static_cast<std::size_t>(epochs) * steps_per_epoch;
    if (n == 0) continue;
    const auto part = one_cycle_points(cfg, n);
    steps.insert(steps.end(), part.begin(), part.end());
  }
  return steps;
}

void attach_one_cycle(StagePlan& plan, int steps_per_epoch) {
  if (steps_per_epoch < 1) fail(ErrorKind::kInvalidArgument, "steps per epoch must be >= 1");
  for (auto& s : plan.stages) {
    s.steps_per_epoch = steps_per_epoch;
    s.steps = stage_steps(s, plan.curve, steps_per_epoch);
  }
}

std::string plan_to_json(const StagePlan& plan) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["one_cycle"] = {{"pct_start", plan.curve.pct_start},
                    {"div_start", plan.curve.div_start},
                    {"div_final", plan.curve.div_final},
                    {"momentum_high", plan.curve.momentum_high},
                    {"momentum_low", plan.curve.momentum_low}};
  auto stages = nlohmann::ordered_json::array();
  for (const auto& s : plan.stages) {
    nlohmann::ordered_json js;
    js["width"] = s.width;
    js["height"] = s.height;
    js["scale"] = s.scale;
    js["batch"] = s.batch;
    js["frozen_epochs"] = s.frozen_epochs;
    js["unfrozen_epochs"] = s.unfrozen_epochs;
    js["lr_max"] = s.lr_max;
    js["weight_decay"] = s.weight_decay;
    js["steps_per_epoch"] = s.steps_per_epoch;
    auto steps = nlohmann::ordered_json::array();
    for (const auto& v : s.steps) steps.push_back({{"lr", v.lr}, {"mom", v.momentum}});
    js["steps"] = std::move(steps);
    stages.push_back(std::move(js));
  }
  j["stages"] = std::move(stages);
  return j.dump(1) + "\n";
}

StagePlan plan_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (const int version = j.value("format_version", 1); version != 1) {
      fail(ErrorKind::kParse,
           "schedule file format_version " + std::to_string(version) + " (expected 1)");
    }
    StagePlan plan;
    if (auto it = j.find("one_cycle"); it != j.end()) {
      plan.curve.pct_start = it->value("pct_start", plan.curve.pct_start);
      plan.curve.div_start = it->value("div_start", plan.curve.div_start);
      plan.curve.div_final = it->value("div_final", plan.curve.div_final);
      plan.curve.momentum_high = it->value("momentum_high", plan.curve.momentum_high);
      plan.curve.momentum_low = it->value("momentum_low", plan.curve.momentum_low);
    }
    for (const auto& js : j.at("stages")) {
      Stage s;
      s.width = js.at("width").get<int>();
      s.height = js.at("height").get<int>();
      s.batch = js.at("batch").get<int>();
      s.frozen_epochs = js.at("frozen_epochs").get<int>();
      s.unfrozen_epochs = js.at("unfrozen_epochs").get<int>();
      s.lr_max = js.at("lr_max").get<double>();
      s.weight_decay = js.value("weight_decay", 1e-3);
      s.scale = js.value("scale", 1.0);
      s.steps_per_epoch = js.value("steps_per_epoch", 0);
      for (const auto& v : js.at("steps")) {
        s.steps.push_back({v.at("lr").get<double>(), v.at("mom").get<double>()});
      }
      if (s.width < 1 || s.height < 1 || s.batch < 1) {
        fail(ErrorKind::kParse, "schedule stage has non-positive size or batch");
      }
      plan.stages.push_back(std::move(s));
    }
    if (plan.stages.empty()) fail(ErrorKind::kParse, "schedule has no stages");
    return plan;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("schedule file: ") + e.what());
  }
}

}  // namespace nucseg
