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
#include <string>
#include <utility>
#include <vector>

#include "nucseg/image.hpp"
#include "nucseg/rng.hpp"

namespace nucseg {

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  // test takes the remainder
};

struct DatasetSplit {
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

/// round(r * n) with ties going up.
std::size_t round_half_up_count(double ratio, std::size_t n);

/// Fisher-Yates shuffle driven by Rng(seed), then cut into
/// |train| = round(0.70 n), |val| = round(0.15 n), |test| = remainder.
/// Throws kInvalidArgument for empty or duplicate ids.
DatasetSplit split(const std::vector<std::string>& ids, std::uint64_t seed,
                   SplitRatios ratios = {});

inline constexpr std::array<double, 3> kImagenetMean = {0.485, 0.456, 0.406};
inline constexpr std::array<double, 3> kImagenetStd = {0.229, 0.224, 0.225};

struct AugmentConfig {
  double flip_prob = 0.5;
  double max_rotate_deg = 10.0;
  double min_zoom = 1.0;
  double max_zoom = 1.1;
  double affine_prob = 0.2;
  double lighting_prob = 0.75;
  double max_lighting = 0.2;

  void validate() const;
};

/// One concrete draw of the augmentation. Brightness is a target in (0, 1)
/// (0.5 = unchanged) and contrast a logit-space scale (1 = unchanged).
struct AugmentParams {
  bool flip = false;
  double angle_deg = 0.0;
  double zoom = 1.0;
  double brightness = 0.5;
  double contrast = 1.0;
};

AugmentParams draw_augment_params(const AugmentConfig& cfg, Rng& rng);

/// Geometry (flip, then rotation/zoom about the centre) hits both image and
/// mask: bilinear for the image, nearest for the mask, replicate fill.
/// Lighting touches the image only. Throws kDimensionMismatch.
std::pair<RasterImage, BinaryMask> apply_augment(const RasterImage& img,
                                                 const BinaryMask& mask,
                                                 const AugmentParams& params);

std::pair<RasterImage, BinaryMask> augment(const RasterImage& img,
                                           const BinaryMask& mask,
                                           const AugmentConfig& cfg, Rng& rng);

/// Per channel (value / 255 - mean) / std. Throws for non-positive std.
std::array<RealPlane, 3> normalize(const RasterImage& img,
                                   const std::array<double, 3>& means = kImagenetMean,
                                   const std::array<double, 3>& stds = kImagenetStd);

struct CountRange {
  int min = 6;
  int max = 12;
};

/// Feulgen-like synthetic patch: pale pink noisy background with dark magenta
/// elliptical nuclei, some of them defocused. The mask is the exact ellipse
/// union sampled at pixel centres.
std::pair<RasterImage, BinaryMask> synth_sample(Rng& rng, int w, int h,
                                                CountRange nuclei = {});

// On-disk layout: <dir>/images/<id>.png, <dir>/masks/<id>.png, <dir>/split.json.

/// Sorted stems of images/*.png. Throws kMissingInput if the directory is absent.
std::vector<std::string> list_dataset_ids(const std::filesystem::path& dir);
std::filesystem::path image_path(const std::filesystem::path& dir, const std::string& id);
std::filesystem::path mask_path(const std::filesystem::path& dir, const std::string& id);

std::string split_to_json(const DatasetSplit& s);
DatasetSplit split_from_json(const std::string& text);
void write_split(const std::filesystem::path& dir, const DatasetSplit& s);
DatasetSplit read_split(const std::filesystem::path& dir);

}  // namespace nucseg
