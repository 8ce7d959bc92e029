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
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nucseg/errors.hpp"

namespace nucseg {

using Rgb = std::array<std::uint8_t, 3>;

namespace detail {

inline void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    fail(ErrorKind::kInvalidArgument,
         "image dimensions must be positive, got " + std::to_string(width) +
             "x" + std::to_string(height));
  }
}

}  // namespace detail

/// Three-channel 8-bit image, row-major, interleaved RGB.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = {0, 0, 0});
  RasterImage(int width, int height, std::vector<std::uint8_t> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  Rgb at(int x, int y) const {
    const std::size_t i = index(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int x, int y, Rgb value) {
    const std::size_t i = index(x, y);
    data_[i] = value[0];
    data_[i + 1] = value[1];
    data_[i + 2] = value[2];
  }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  bool operator==(const RasterImage&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
           3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Single-channel 8-bit plane. The tag keeps grayscale images and probability
/// maps from being mixed up at call sites; both accept any sample value.
template <typename Tag>
class Plane8 {
 public:
  Plane8() = default;
  Plane8(int width, int height, std::uint8_t fill = 0)
      : width_(width), height_(height) {
    detail::check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Plane8(int width, int height, std::vector<std::uint8_t> samples)
      : width_(width), height_(height), data_(std::move(samples)) {
    detail::check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height) {
      fail(ErrorKind::kDimensionMismatch,
           "sample count does not match " + std::to_string(width) + "x" +
               std::to_string(height));
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
  void set(int x, int y, std::uint8_t v) { data_[index(x, y)] = v; }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  bool operator==(const Plane8&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

struct GrayTag {};
struct ProbTag {};

using GrayImage = Plane8<GrayTag>;
/// value / 255 is the foreground probability.
using ProbMap = Plane8<ProbTag>;

/// Foreground/background mask. Every sample is exactly 0 or 255; the class
/// never hands out mutable access to its samples.
class BinaryMask {
 public:
  static constexpr std::uint8_t kOn = 255;
  static constexpr std::uint8_t kOff = 0;

  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);
  /// Throws kInvalidArgument if any sample is outside {0, 255}.
  BinaryMask(int width, int height, std::vector<std::uint8_t> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  bool test(int x, int y) const { return data_[index(x, y)] != 0; }
  void set(int x, int y, bool on) { data_[index(x, y)] = on ? kOn : kOff; }

  std::span<const std::uint8_t> data() const { return data_; }
  std::size_t count() const;

  bool operator==(const BinaryMask&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Real-valued single plane, used for smoothed intermediates and normalized
/// feature channels.
struct RealPlane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  RealPlane() = default;
  RealPlane(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

template <typename A, typename B>
bool same_size(const A& a, const B& b) {
  return a.width() == b.width() && a.height() == b.height();
}

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* what) {
  if (!same_size(a, b)) {
    fail(ErrorKind::kDimensionMismatch,
         std::string(what) + ": " + std::to_string(a.width()) + "x" +
             std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
             "x" + std::to_string(b.height()));
  }
}

inline int clamp_index(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

}  // namespace nucseg
