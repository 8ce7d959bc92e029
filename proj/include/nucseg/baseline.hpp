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

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nucseg/dataset.hpp"
#include "nucseg/image.hpp"
#include "nucseg/schedules.hpp"

namespace nucseg::baseline {

inline constexpr int kFeatureCount = 9;
inline constexpr int kWindow = 5;
inline constexpr int kWeightsFormatVersion = 1;

/// Per pixel: 3 normalized channel values, 3 local 5x5 means and 3 local 5x5
/// population standard deviations of the normalized channels (replicated
/// borders). Stored pixel-major, kFeatureCount floats per pixel.
struct FeatureMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
  std::span<const float, kFeatureCount> at(std::size_t pixel) const {
    return std::span<const float, kFeatureCount>(values.data() + pixel * kFeatureCount,
                                                 kFeatureCount);
  }
};

FeatureMap extract_features(const RasterImage& img);

struct Weights {
  std::array<double, kFeatureCount> w{};
  double b = 0.0;

  bool operator==(const Weights&) const = default;
};

/// round(255 * sigmoid(w.x + b)), ties up.
ProbMap predict(const Weights& weights, const FeatureMap& features);
ProbMap predict(const Weights& weights, const RasterImage& img);

struct LossGrad {
  double loss = 0.0;
  std::array<double, kFeatureCount> grad_w{};
  double grad_b = 0.0;
};

struct Example {
  const FeatureMap* features;
  const BinaryMask* target;
};

inline constexpr double kProbabilityClamp = 1e-7;

/// Mean binary cross-entropy over every pixel of the batch (probabilities
/// clamped to [1e-7, 1 - 1e-7]) plus (weight_decay / 2) * |w|^2, with its
/// exact gradient. Throws kNumeric on a non-finite logit, kDimensionMismatch
/// when a target does not match its features.
LossGrad loss_and_grad(const Weights& weights, std::span<const Example> batch,
                       double weight_decay);
LossGrad loss_and_grad(const Weights& weights, const FeatureMap& features,
                       const BinaryMask& target, double weight_decay);

struct Sample {
  RasterImage image;
  BinaryMask mask;
};

struct TrainOptions {
  std::uint64_t seed = 0;
  bool augment = false;
  AugmentConfig augment_config;
  /// Starting weights; initial_weights(seed) when unset.
  std::optional<Weights> start;
  /// Train this plan stage alone (0-based); all stages when unset.
  std::optional<std::size_t> only_stage;
  /// Called once per stage part with a short description; may be empty.
  std::function<void(const std::string&)> log;
};

struct TrainResult {
  Weights weights;
  /// Batch loss before each optimizer step, across all stages.
  std::vector<double> loss_history;
};

/// Box-filter downsample by an integer factor (image) / nearest (mask).
RasterImage downsample_image(const RasterImage& img, int factor);
BinaryMask downsample_mask(const BinaryMask& mask, int factor);

/// Number of optimizer steps per epoch for a training set of n images.
int steps_per_epoch(std::size_t n, int batch);

/// SGD with classical momentum (v = mu v + g; p -= lr v) driven by each
/// stage's one-cycle values. Frozen epochs update b only. Stage images are
/// the samples downsampled by 1/scale. Throws kInvalidArgument for an empty
/// training set.
TrainResult train(std::span<const Sample> samples, const StagePlan& plan,
                  const TrainOptions& options);

/// Live lr range test on one stage's data: one step per sweep lr with fixed
/// momentum, stopping at divergence. Returns the recorded losses.
std::vector<double> lr_range_test(std::span<const Sample> samples, const Stage& stage,
                                  const Weights& start, const LrFinderConfig& cfg,
                                  std::uint64_t seed);

Weights initial_weights(std::uint64_t seed);

std::string weights_to_json(const Weights& w);
Weights weights_from_json(const std::string& text);

}  // namespace nucseg::baseline
