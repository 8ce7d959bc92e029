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

#include "nucseg/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>

namespace nucseg {

RasterImage::RasterImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  detail::check_dims(width, height);
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill[0];
    data_[i + 1] = fill[1];
    data_[i + 2] = fill[2];
  }
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), data_(std::move(samples)) {
  detail::check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height * 3) {
    fail(ErrorKind::kDimensionMismatch,
         "RGB sample count does not match " + std::to_string(width) + "x" +
             std::to_string(height));
  }
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
  detail::check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, fill ? kOn : kOff);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), data_(std::move(samples)) {
  detail::check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorKind::kDimensionMismatch, "mask sample count does not match dimensions");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] != kOn && data_[i] != kOff) {
      fail(ErrorKind::kInvalidArgument,
           "mask sample " + std::to_string(data_[i]) + " at offset " +
               std::to_string(i) + " is neither 0 nor 255");
    }
  }
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(
      std::count(data_.begin(), data_.end(), kOn));
}

GrayImage to_grayscale(const RasterImage& img) {
  GrayImage out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double y = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] +
                     0.114 * src[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::floor(y + 0.5), 0.0, 255.0));
  }
  return out;
}

double default_gaussian_sigma(int kernel_size) {
  return 0.3 * ((kernel_size - 1) * 0.5 - 1.0) + 0.8;
}

std::vector<double> gaussian_kernel(int kernel_size, double sigma) {
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    fail(ErrorKind::kInvalidArgument,
         "Gaussian kernel size must be odd and positive, got " +
             std::to_string(kernel_size));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    fail(ErrorKind::kInvalidArgument, "Gaussian sigma must be positive");
  }
  const int half = kernel_size / 2;
  std::vector<double> taps(kernel_size);
  double sum = 0.0;
  for (int i = 0; i < kernel_size; ++i) {
    const double d = i - half;
    taps[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

namespace {

// Separable convolution with replicated borders, rows then columns.
RealPlane convolve_separable(const RealPlane& src, const std::vector<double>& taps) {
  const int w = src.width;
  const int h = src.height;
  const int half = static_cast<int>(taps.size()) / 2;
  RealPlane tmp(w, h);
  for (int y = 0; y < h; ++y) {
    const double* row = &src.data[static_cast<std::size_t>(y) * w];
    double* out = &tmp.data[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k) {
        acc += taps[k + half] * row[clamp_index(x + k, w)];
      }
      out[x] = acc;
    }
  }
  RealPlane dst(w, h);
  std::vector<const double*> rows(taps.size());
  for (int y = 0; y < h; ++y) {
    for (int k = -half; k <= half; ++k) {
      rows[k + half] = &tmp.data[static_cast<std::size_t>(clamp_index(y + k, h)) * w];
    }
    double* out = &dst.data[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * rows[k][x];
      out[x] = acc;
    }
  }
  return dst;
}

}  // namespace

RealPlane gaussian_blur(const RealPlane& img, int kernel_size,
                        std::optional<double> sigma) {
  const auto taps =
      gaussian_kernel(kernel_size, sigma.value_or(default_gaussian_sigma(kernel_size)));
  return convolve_separable(img, taps);
}

GrayImage gaussian_blur(const GrayImage& img, int kernel_size,
                        std::optional<double> sigma) {
  RealPlane src(img.width(), img.height());
  std::copy(img.data().begin(), img.data().end(), src.data.begin());
  const RealPlane blurred = gaussian_blur(src, kernel_size, sigma);
  GrayImage out(img.width(), img.height());
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = static_cast<std::uint8_t>(
        std::clamp(std::floor(blurred.data[i] + 0.5), 0.0, 255.0));
  }
  return out;
}

BinaryMask threshold_binary(const GrayImage& img, int t) {
  std::vector<std::uint8_t> out(img.data().size());
  std::transform(img.data().begin(), img.data().end(), out.begin(),
                 [t](std::uint8_t v) {
                   return v > t ? BinaryMask::kOn : BinaryMask::kOff;
                 });
  return BinaryMask(img.width(), img.height(), std::move(out));
}

StructuringElement::StructuringElement(ElementShape shape, int w, int h,
                                       std::vector<bool> cells)
    : shape_(shape), width_(w), height_(h), cells_(std::move(cells)) {
  const int cx = w / 2;
  const int cy = h / 2;
  for (int row = 0; row < h; ++row) {
    int col = 0;
    while (col < w) {
      if (!contains(col, row)) {
        ++col;
        continue;
      }
      const int begin = col;
      while (col < w && contains(col, row)) ++col;
      runs_.push_back({row - cy, begin - cx, col - 1 - cx});
    }
  }
}

int StructuringElement::cell_count() const {
  return static_cast<int>(std::count(cells_.begin(), cells_.end(), true));
}

StructuringElement make_structuring_element(ElementShape shape, int w, int h) {
  if (w < 1 || h < 1 || w % 2 == 0 || h % 2 == 0) {
    fail(ErrorKind::kInvalidArgument,
         "structuring element dimensions must be odd and positive, got " +
             std::to_string(w) + "x" + std::to_string(h));
  }
  std::vector<bool> cells(static_cast<std::size_t>(w) * h, true);
  if (shape == ElementShape::kEllipse) {
    const double cx = (w - 1) / 2.0;
    const double cy = (h - 1) / 2.0;
    const double rx = std::max(cx, 0.5);
    const double ry = std::max(cy, 0.5);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const double u = (j - cx) / rx;
        const double v = (i - cy) / ry;
        cells[static_cast<std::size_t>(i) * w + j] = u * u + v * v <= 1.0;
      }
    }
  }
  return StructuringElement(shape, w, h, std::move(cells));
}

namespace {

// Per-row prefix counts of foreground pixels; row y occupies (w + 1) entries.
std::vector<int> row_prefix_counts(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> prefix(static_cast<std::size_t>(w + 1) * h);
  auto src = mask.data();
  for (int y = 0; y < h; ++y) {
    int* p = &prefix[static_cast<std::size_t>(y) * (w + 1)];
    const std::uint8_t* row = &src[static_cast<std::size_t>(y) * w];
    p[0] = 0;
    for (int x = 0; x < w; ++x) p[x + 1] = p[x] + (row[x] != 0);
  }
  return prefix;
}

// Each footprint run covers a clamped, contiguous span of one (clamped) row,
// so "all covered are on" / "any covered is on" reduce to prefix-count
// lookups per run.
template <bool kErode>
BinaryMask morph(const BinaryMask& mask, const StructuringElement& se) {
  const int w = mask.width();
  const int h = mask.height();
  const auto prefix = row_prefix_counts(mask);
  const auto& runs = se.runs();
  std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool result = kErode;
      for (const auto& run : runs) {
        const int yy = clamp_index(y + run.dy, h);
        const int a = clamp_index(x + run.dx_begin, w);
        const int b = clamp_index(x + run.dx_end, w);
        const int* p = &prefix[static_cast<std::size_t>(yy) * (w + 1)];
        const int on = p[b + 1] - p[a];
        if constexpr (kErode) {
          if (on != b - a + 1) {
            result = false;
            break;
          }
        } else {
          if (on > 0) {
            result = true;
            break;
          }
        }
      }
      out[static_cast<std::size_t>(y) * w + x] =
          result ? BinaryMask::kOn : BinaryMask::kOff;
    }
  }
  return BinaryMask(w, h, std::move(out));
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
  return morph<true>(mask, se);
}

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
  return morph<false>(mask, se);
}

BinaryMask opening(const BinaryMask& mask, const StructuringElement& se) {
  return dilate(erode(mask, se), se);
}

BinaryMask complement(const BinaryMask& mask) {
  std::vector<std::uint8_t> out(mask.data().size());
  std::transform(mask.data().begin(), mask.data().end(), out.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(255 - v); });
  return BinaryMask(mask.width(), mask.height(), std::move(out));
}

BinaryMask canny_edges(const BinaryMask& mask, CannyThresholds thresholds) {
  if (thresholds.low > thresholds.high) {
    fail(ErrorKind::kInvalidArgument, "Canny low threshold exceeds high threshold");
  }
  const int w = mask.width();
  const int h = mask.height();

  RealPlane src(w, h);
  std::copy(mask.data().begin(), mask.data().end(), src.data.begin());
  const RealPlane smooth = gaussian_blur(src, 5, 1.1);

  RealPlane gx(w, h);
  RealPlane gy(w, h);
  RealPlane mag(w, h);
  for (int y = 0; y < h; ++y) {
    const int ym = clamp_index(y - 1, h);
    const int yp = clamp_index(y + 1, h);
    for (int x = 0; x < w; ++x) {
      const int xm = clamp_index(x - 1, w);
      const int xp = clamp_index(x + 1, w);
      const double dx = (smooth.at(xp, ym) + 2 * smooth.at(xp, y) + smooth.at(xp, yp)) -
                        (smooth.at(xm, ym) + 2 * smooth.at(xm, y) + smooth.at(xm, yp));
      const double dy = (smooth.at(xm, yp) + 2 * smooth.at(x, yp) + smooth.at(xp, yp)) -
                        (smooth.at(xm, ym) + 2 * smooth.at(x, ym) + smooth.at(xp, ym));
      gx.at(x, y) = dx;
      gy.at(x, y) = dy;
      mag.at(x, y) = std::hypot(dx, dy);
    }
  }

  auto mag_at = [&](int x, int y) {
    return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : mag.at(x, y);
  };

  // 0: not an edge, 1: weak candidate, 2: strong.
  std::vector<std::uint8_t> cls(static_cast<std::size_t>(w) * h, 0);
  const double tan22 = std::tan(M_PI / 8.0);
  const double tan67 = std::tan(3.0 * M_PI / 8.0);
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = mag.at(x, y);
      if (m <= thresholds.low) continue;
      const double ax = std::abs(gx.at(x, y));
      const double ay = std::abs(gy.at(x, y));
      double before;
      double after;
      if (ay <= tan22 * ax) {
        before = mag_at(x - 1, y);
        after = mag_at(x + 1, y);
      } else if (ay > tan67 * ax) {
        before = mag_at(x, y - 1);
        after = mag_at(x, y + 1);
      } else if ((gx.at(x, y) > 0) == (gy.at(x, y) > 0)) {
        before = mag_at(x - 1, y - 1);
        after = mag_at(x + 1, y + 1);
      } else {
        before = mag_at(x + 1, y - 1);
        after = mag_at(x - 1, y + 1);
      }
      // Asymmetric comparison keeps exactly one pixel across plateau pairs.
      if (m > before && m >= after) {
        if (m > thresholds.high) {
          cls[static_cast<std::size_t>(y) * w + x] = 2;
          queue.emplace_back(x, y);
        } else {
          cls[static_cast<std::size_t>(y) * w + x] = 1;
        }
      }
    }
  }

  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        auto& c = cls[static_cast<std::size_t>(ny) * w + nx];
        if (c == 1) {
          c = 2;
          queue.emplace_back(nx, ny);
        }
      }
    }
  }

  std::vector<std::uint8_t> out(cls.size());
  for (std::size_t i = 0; i < cls.size(); ++i) {
    out[i] = cls[i] == 2 ? BinaryMask::kOn : BinaryMask::kOff;
  }
  return BinaryMask(w, h, std::move(out));
}

}  // namespace nucseg
