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

#include "nucseg/annotations.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace nucseg {
namespace {

using nlohmann::json;

int line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + offset, '\n'));
}

const json& require_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    fail(ErrorKind::kParse, where + ": missing field '" + key + "'");
  }
  return *it;
}

}  // namespace

AnnotationSet parse_annotations(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParse, "annotation document line " +
                                std::to_string(line_of_offset(document, e.byte)) +
                                ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::kParse, "annotation document is not an object");

  AnnotationSet ann;
  try {
    ann.image_width = require_field(doc, "imageWidth", "document").get<int>();
    ann.image_height = require_field(doc, "imageHeight", "document").get<int>();
    if (ann.image_width < 1 || ann.image_height < 1) {
      fail(ErrorKind::kParse, "imageWidth/imageHeight must be positive");
    }
    const json& shapes = require_field(doc, "shapes", "document");
    if (!shapes.is_array()) fail(ErrorKind::kParse, "'shapes' is not an array");
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      const json& s = shapes[i];
      const std::string where = "shape " + std::to_string(i);
      const std::string type = s.value("shape_type", std::string("polygon"));
      if (type != "polygon") {
        fail(ErrorKind::kParse,
             "unsupported shape_type '" + type + "' at index " + std::to_string(i));
      }
      const json& pts = require_field(s, "points", where);
      if (!pts.is_array() || pts.size() < 3) {
        fail(ErrorKind::kParse, "degenerate polygon at index " + std::to_string(i));
      }
      LabeledShape shape;
      shape.label = s.value("label", std::string());
      for (const json& p : pts) {
        if (!p.is_array() || p.size() != 2) {
          fail(ErrorKind::kParse, where + ": point is not an [x, y] pair");
        }
        shape.polygon.vertices.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      ann.shapes.push_back(std::move(shape));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, std::string("annotation document: ") + e.what());
  }
  return ann;
}

void fill_polygon(BinaryMask& mask, const Polygon& polygon) {
  const auto& v = polygon.vertices;
  const std::size_t n = v.size();
  if (n < 3) return;
  const int w = mask.width();
  const int h = mask.height();

  double ymin = v[0].y;
  double ymax = v[0].y;
  for (const auto& p : v) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int row_begin = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
  const int row_end = std::min(h - 1, static_cast<int>(std::ceil(ymax)));

  std::vector<double> xs;
  for (int y = row_begin; y <= row_end; ++y) {
    const double py = y + 0.5;
    xs.clear();
    // Half-open crossing rule: an edge counts when its endpoints straddle py.
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = v[i];
      const Point& b = v[j];
      if ((a.y > py) != (b.y > py)) {
        xs.push_back((b.x - a.x) * (py - a.y) / (b.y - a.y) + a.x);
      }
    }
    std::sort(xs.begin(), xs.end());
    // A centre px is inside iff an odd number of crossings satisfy px < x,
    // i.e. px lies in [xs[2k], xs[2k+1]).
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const double lo = xs[k];
      const double hi = xs[k + 1];
      int x = static_cast<int>(std::ceil(std::max(lo - 0.5, -1.0)));
      while (x > 0 && x - 1 + 0.5 >= lo) --x;
      x = std::max(x, 0);
      for (; x < w; ++x) {
        const double px = x + 0.5;
        if (px < lo) continue;
        if (px >= hi) break;
        mask.set(x, y, true);
      }
    }
  }
}

BinaryMask rasterize(const AnnotationSet& ann) {
  BinaryMask mask(ann.image_width, ann.image_height, false);
  for (const auto& shape : ann.shapes) fill_polygon(mask, shape.polygon);
  return mask;
}

}  // namespace nucseg
