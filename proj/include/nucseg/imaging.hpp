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

// Low-level pixel operators. All functions are pure and thread-safe; every
// neighbourhood operator replicates edge pixels outside the image.

#pragma once

#include <optional>
#include <vector>

#include "nucseg/image.hpp"

namespace nucseg {

/// ITU-R 601 luma, rounded half-up.
GrayImage to_grayscale(const RasterImage& img);

inline GrayImage as_gray(const ProbMap& pm) {
  return GrayImage(pm.width(), pm.height(),
                   std::vector<std::uint8_t>(pm.data().begin(), pm.data().end()));
}

/// Size-to-sigma rule used when no sigma is given: 0.3*((k-1)/2 - 1) + 0.8.
double default_gaussian_sigma(int kernel_size);

/// Normalized 1-D Gaussian taps, length kernel_size (odd).
std::vector<double> gaussian_kernel(int kernel_size, double sigma);

/// Separable Gaussian blur, rounded to the nearest integer per pixel.
/// Throws kInvalidArgument for even or non-positive kernel sizes.
GrayImage gaussian_blur(const GrayImage& img, int kernel_size,
                        std::optional<double> sigma = std::nullopt);

/// Same convolution without the final rounding.
RealPlane gaussian_blur(const RealPlane& img, int kernel_size,
                        std::optional<double> sigma = std::nullopt);

/// pixel > t -> 255, else 0.
BinaryMask threshold_binary(const GrayImage& img, int t);

enum class ElementShape { kSquare, kEllipse };

/// Odd-sized boolean footprint centred on its middle cell.
class StructuringElement {
 public:
  /// One maximal horizontal run of true cells, offsets relative to the centre.
  struct Run {
    int dy;
    int dx_begin;
    int dx_end;  // inclusive
  };

  int width() const { return width_; }
  int height() const { return height_; }
  ElementShape shape() const { return shape_; }
  bool contains(int col, int row) const { return cells_[row * width_ + col]; }
  int cell_count() const;
  const std::vector<Run>& runs() const { return runs_; }

 private:
  friend StructuringElement make_structuring_element(ElementShape, int, int);
  StructuringElement(ElementShape shape, int w, int h, std::vector<bool> cells);

  ElementShape shape_;
  int width_;
  int height_;
  std::vector<bool> cells_;
  std::vector<Run> runs_;
};

/// square: all cells. ellipse: ((j-cx)/rx)^2 + ((i-cy)/ry)^2 <= 1 with
/// rx = max(cx, 0.5), ry = max(cy, 0.5). Throws for even or non-positive sizes.
StructuringElement make_structuring_element(ElementShape shape, int w, int h);

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);
/// dilate(erode(mask)).
BinaryMask opening(const BinaryMask& mask, const StructuringElement& se);

BinaryMask complement(const BinaryMask& mask);

struct CannyThresholds {
  double low = 50.0;
  double high = 150.0;
};

/// Gaussian smoothing (5x5, sigma 1.1), 3x3 Sobel, non-maximum suppression,
/// then hysteresis with 8-connectivity. Thresholds apply to the L2 gradient
/// magnitude. Throws kInvalidArgument when low > high.
BinaryMask canny_edges(const BinaryMask& mask, CannyThresholds thresholds = {});

}  // namespace nucseg
