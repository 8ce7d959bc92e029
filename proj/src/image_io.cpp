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

#include "nucseg/image_io.hpp"

#include <png.h>

#include <cstring>
#include <memory>
#include <vector>

#include "nucseg/file_util.hpp"
#include "nucseg/imaging.hpp"

namespace fs = std::filesystem;

namespace nucseg {
namespace {

struct Decoded {
  int width;
  int height;
  std::vector<std::uint8_t> samples;
};

// `format` of 0 means: grayscale files decode as GRAY, colour files as RGB.
Decoded decode(const fs::path& path, png_uint_32 format, bool* is_color = nullptr) {
  const std::string bytes = read_file(path);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    fail(ErrorKind::kParse, "not a readable PNG: " + path.string() + " (" +
                                image.message + ")");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  if (is_color) *is_color = color;
  image.format = format != 0 ? format : (color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY);
  Decoded out{static_cast<int>(image.width), static_cast<int>(image.height), {}};
  out.samples.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.samples.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorKind::kParse, "PNG decode failed for " + path.string() + " (" + msg + ")");
  }
  return out;
}

void encode(const fs::path& path, int width, int height, png_uint_32 format,
            const std::uint8_t* samples) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, samples, 0, nullptr)) {
    fail(ErrorKind::kIo, "PNG encode failed for " + path.string());
  }
  std::string buffer(size, '\0');
  if (!png_image_write_to_memory(&image, buffer.data(), &size, 0, samples, 0, nullptr)) {
    fail(ErrorKind::kIo, "PNG encode failed for " + path.string() + " (" +
                             image.message + ")");
  }
  buffer.resize(size);
  write_file_atomic(path, buffer);
}

}  // namespace

RasterImage read_png_rgb(const fs::path& path) {
  auto d = decode(path, PNG_FORMAT_RGB);
  return RasterImage(d.width, d.height, std::move(d.samples));
}

GrayImage read_png_gray(const fs::path& path) {
  bool color = false;
  auto d = decode(path, 0, &color);
  if (color) return to_grayscale(RasterImage(d.width, d.height, std::move(d.samples)));
  return GrayImage(d.width, d.height, std::move(d.samples));
}

ProbMap read_png_prob(const fs::path& path) {
  GrayImage g = read_png_gray(path);
  return ProbMap(g.width(), g.height(),
                 std::vector<std::uint8_t>(g.data().begin(), g.data().end()));
}

BinaryMask read_png_mask(const fs::path& path) {
  auto d = decode(path, PNG_FORMAT_GRAY);
  try {
    return BinaryMask(d.width, d.height, std::move(d.samples));
  } catch (const Error& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

void write_png(const fs::path& path, const RasterImage& img) {
  encode(path, img.width(), img.height(), PNG_FORMAT_RGB, img.data().data());
}

void write_png(const fs::path& path, const GrayImage& img) {
  encode(path, img.width(), img.height(), PNG_FORMAT_GRAY, img.data().data());
}

void write_png(const fs::path& path, const ProbMap& img) {
  encode(path, img.width(), img.height(), PNG_FORMAT_GRAY, img.data().data());
}

void write_png(const fs::path& path, const BinaryMask& mask) {
  encode(path, mask.width(), mask.height(), PNG_FORMAT_GRAY, mask.data().data());
}

}  // namespace nucseg
