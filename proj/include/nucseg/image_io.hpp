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

#include <filesystem>
#include <string>
#include <string_view>

#include "nucseg/image.hpp"

namespace nucseg {

/// 8-bit PNG codecs. Readers convert any PNG colour type to the requested
/// layout; writers go through write_file_atomic.
RasterImage read_png_rgb(const std::filesystem::path& path);
GrayImage read_png_gray(const std::filesystem::path& path);
ProbMap read_png_prob(const std::filesystem::path& path);
/// Rejects files containing samples other than 0 and 255.
BinaryMask read_png_mask(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const RasterImage& img);
void write_png(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const ProbMap& img);
void write_png(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace nucseg
