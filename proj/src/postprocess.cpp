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

#include "nucseg/postprocess.hpp"

namespace nucseg {

void PostprocessConfig::validate() const {
  if (blur_kernel < 1 || blur_kernel % 2 == 0 || erode_size < 1 || erode_size % 2 == 0 ||
      open_size < 1 || open_size % 2 == 0) {
    fail(ErrorKind::kInvalidArgument, "post-processing kernel sizes must be odd and positive");
  }
  if (threshold < 0 || threshold > 255) {
    fail(ErrorKind::kInvalidArgument, "threshold must lie in [0, 255]");
  }
  if (blur_sigma && !(*blur_sigma > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "blur sigma must be positive");
  }
}

BinaryMask postprocess(const ProbMap& pm, const PostprocessConfig& cfg) {
  cfg.validate();
  const GrayImage blurred = gaussian_blur(as_gray(pm), cfg.blur_kernel, cfg.blur_sigma);
  const BinaryMask binary = threshold_binary(blurred, cfg.threshold);
  const BinaryMask eroded =
      erode(binary, make_structuring_element(cfg.erode_shape, cfg.erode_size, cfg.erode_size));
  return opening(eroded,
                 make_structuring_element(cfg.open_shape, cfg.open_size, cfg.open_size));
}

RasterImage overlay_edges(const RasterImage& img, const BinaryMask& mask,
                          CannyThresholds thresholds) {
  require_same_size(img, mask, "overlay_edges");
  const BinaryMask edges = canny_edges(mask, thresholds);
  RasterImage out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (edges.test(x, y)) out.set(x, y, kGreen);
    }
  }
  return out;
}

RasterImage overlay_iou(const RasterImage& img, const BinaryMask& target,
                        const BinaryMask& pred) {
  require_same_size(img, target, "overlay_iou image/target");
  require_same_size(target, pred, "overlay_iou target/pred");
  RasterImage out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const bool t = target.test(x, y);
      const bool p = pred.test(x, y);
      if (t && p) {
        out.set(x, y, kGreen);
      } else if (t || p) {
        out.set(x, y, kBlue);
      }
    }
  }
  return out;
}

}  // namespace nucseg
