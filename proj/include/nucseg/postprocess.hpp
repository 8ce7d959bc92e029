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

#include <optional>

#include "nucseg/image.hpp"
#include "nucseg/imaging.hpp"

namespace nucseg {

/// Defaults: 5x5 blur (sigma 1.1), threshold 230, 3x3 elliptical erosion,
/// 15x15 elliptical opening.
struct PostprocessConfig {
  int blur_kernel = 5;
  std::optional<double> blur_sigma;
  int threshold = 230;
  ElementShape erode_shape = ElementShape::kEllipse;
  int erode_size = 3;
  ElementShape open_shape = ElementShape::kEllipse;
  int open_size = 15;

  void validate() const;
};

/// blur -> threshold -> erode -> open, in that order.
BinaryMask postprocess(const ProbMap& pm, const PostprocessConfig& cfg = {});

/// Canny edges of `mask` painted pure green onto a copy of `img`.
RasterImage overlay_edges(const RasterImage& img, const BinaryMask& mask,
                          CannyThresholds thresholds = {});

/// Intersection green (0,255,0), union minus intersection blue (0,0,255).
RasterImage overlay_iou(const RasterImage& img, const BinaryMask& target,
                        const BinaryMask& pred);

inline constexpr Rgb kGreen = {0, 255, 0};
inline constexpr Rgb kBlue = {0, 0, 255};

}  // namespace nucseg
