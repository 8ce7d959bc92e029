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

#include <string>
#include <string_view>
#include <vector>

#include "nucseg/image.hpp"

namespace nucseg {

struct Point {
  double x;
  double y;
};

/// Closed polygon in pixel coordinates; at least three vertices.
struct Polygon {
  std::vector<Point> vertices;
};

struct LabeledShape {
  std::string label;
  Polygon polygon;
};

struct AnnotationSet {
  int image_width = 0;
  int image_height = 0;
  std::vector<LabeledShape> shapes;
};

/// Parses the labelme subset
///   {"imageWidth": int, "imageHeight": int,
///    "shapes": [{"label": str, "shape_type": "polygon", "points": [[x,y],...]}]}
/// Malformed JSON raises kParse with the line number; a shape with fewer than
/// three points raises kParse "degenerate polygon at index i".
AnnotationSet parse_annotations(std::string_view document);

/// Even-odd scanline fill sampled at pixel centres, union over shapes.
/// Polygon parts outside the image contribute nothing.
BinaryMask rasterize(const AnnotationSet& ann);

/// Fills one polygon into an existing mask (union).
void fill_polygon(BinaryMask& mask, const Polygon& polygon);

}  // namespace nucseg
