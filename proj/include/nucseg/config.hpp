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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nucseg/dataset.hpp"
#include "nucseg/postprocess.hpp"
#include "nucseg/tiler.hpp"

namespace nucseg {

/// Shared configuration for every subcommand. Precedence: built-in defaults,
/// then the config document, then command-line flags.
struct PipelineConfig {
  std::filesystem::path dataset_dir = "dataset";
  std::filesystem::path predictions_dir = "predictions";
  std::filesystem::path reports_dir = "reports";

  int tile_width = 1600;
  int tile_height = 1200;
  TilePolicy tile_policy = TilePolicy::kDiscardPartial;

  std::uint64_t split_seed = 0;
  double train_ratio = 0.70;
  double val_ratio = 0.15;
  double test_ratio = 0.15;

  PostprocessConfig postprocess;

  int stages = 3;
  std::optional<std::vector<double>> lr_max;
  std::optional<std::vector<int>> batches;
  int frozen_epochs = 5;
  int unfrozen_epochs = 10;
  double weight_decay = 1e-3;
  /// Pipeline runs pick each stage's lr_max with a live range test unless
  /// lr_max is given explicitly.
  bool lr_find = true;

  int synth_width = 400;
  int synth_height = 300;
  CountRange nuclei;

  int parallelism = 1;

  /// Throws kInvalidArgument.
  void validate() const;
};

inline constexpr const char* kConfigEnvVar = "NUCSEG_CONFIG";

/// Applies the fields present in `document` on top of `base`.
PipelineConfig config_from_json(const std::string& document, PipelineConfig base = {});
std::string config_to_json(const PipelineConfig& cfg);

/// Loads `explicit_path` if given, else $NUCSEG_CONFIG if set, else defaults.
PipelineConfig load_config(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace nucseg
