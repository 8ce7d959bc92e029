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
#include <filesystem>
#include <string>
#include <vector>

#include "nucseg/image.hpp"
#include "nucseg/postprocess.hpp"

namespace nucseg {

struct OverlapCounts {
  std::size_t target = 0;
  std::size_t pred = 0;
  std::size_t intersection = 0;
  std::size_t union_size = 0;
};

/// Throws kDimensionMismatch.
OverlapCounts overlap(const BinaryMask& target, const BinaryMask& pred);

/// |t & p| / |t | p|; 1.0 when both are empty.
double iou(const BinaryMask& target, const BinaryMask& pred);
/// 2 |t & p| / (|t| + |p|); 1.0 when both are empty.
double dice(const BinaryMask& target, const BinaryMask& pred);
double iou(const OverlapCounts& c);
double dice(const OverlapCounts& c);

struct MetricsRow {
  std::string id;
  double iou = 0.0;
  double dice = 0.0;
  std::size_t target_px = 0;
  std::size_t pred_px = 0;
  std::size_t intersection_px = 0;
};

/// Macro averages: per-image values first, then their arithmetic mean.
struct MetricsReport {
  std::vector<MetricsRow> rows;
  double mean_iou = 0.0;
  double mean_dice = 0.0;
  std::size_t count = 0;
};

MetricsRow make_row(std::string id, const BinaryMask& target, const BinaryMask& pred);
MetricsReport make_report(std::vector<MetricsRow> rows);

struct EvaluateOptions {
  PostprocessConfig postprocess;
  /// When false, prediction files are treated as finished masks (> 127).
  bool apply_postprocess = true;
  int threads = 1;
};

/// Reads <dataset>/masks/<id>.png and <pred_dir>/<id>.png for every id, in
/// id order. Throws kMissingInput listing every id without a prediction.
MetricsReport evaluate(const std::filesystem::path& dataset_dir,
                       const std::vector<std::string>& ids,
                       const std::filesystem::path& pred_dir,
                       const EvaluateOptions& options = {});

/// Columns id,iou,dice,target_px,pred_px,intersection_px; final MEAN line
/// carries the mean IoU/Dice and pixel totals.
std::string report_to_csv(const MetricsReport& report);
std::string report_to_json(const MetricsReport& report);

}  // namespace nucseg
