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

#include "nucseg/tiler.hpp"

namespace nucseg {

std::string Tile::name() const {
  return "row" + std::to_string(row) + "_col" + std::to_string(col);
}

TileGrid plan_tiles(int src_w, int src_h, int tile_w, int tile_h, TilePolicy policy) {
  if (tile_w < 1 || tile_h < 1) {
    fail(ErrorKind::kInvalidArgument, "tile dimensions must be at least 1");
  }
  if (src_w < 0 || src_h < 0) {
    fail(ErrorKind::kInvalidArgument, "source dimensions must be non-negative");
  }
  TileGrid grid;
  grid.source_width = src_w;
  grid.source_height = src_h;
  grid.tile_width = tile_w;
  grid.tile_height = tile_h;
  grid.policy = policy;
  if (policy == TilePolicy::kDiscardPartial) {
    grid.rows = src_h / tile_h;
    grid.cols = src_w / tile_w;
  } else {
    grid.rows = (src_h + tile_h - 1) / tile_h;
    grid.cols = (src_w + tile_w - 1) / tile_w;
  }
  return grid;
}

std::vector<Tile> extract_tiles(const RasterImage& img, const TileGrid& grid) {
  if (img.width() != grid.source_width || img.height() != grid.source_height) {
    fail(ErrorKind::kDimensionMismatch,
         "tile grid planned for " + std::to_string(grid.source_width) + "x" +
             std::to_string(grid.source_height) + ", image is " +
             std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  std::vector<Tile> tiles;
  tiles.reserve(static_cast<std::size_t>(grid.count()));
  const auto src = img.data();
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const int x0 = c * grid.tile_width;
      const int y0 = r * grid.tile_height;
      std::vector<std::uint8_t> samples(
          static_cast<std::size_t>(grid.tile_width) * grid.tile_height * 3);
      auto* dst = samples.data();
      for (int y = 0; y < grid.tile_height; ++y) {
        const int sy = clamp_index(y0 + y, img.height());
        for (int x = 0; x < grid.tile_width; ++x) {
          const int sx = clamp_index(x0 + x, img.width());
          const std::size_t s =
              (static_cast<std::size_t>(sy) * img.width() + sx) * 3;
          *dst++ = src[s];
          *dst++ = src[s + 1];
          *dst++ = src[s + 2];
        }
      }
      tiles.push_back({r, c, x0, y0,
                       RasterImage(grid.tile_width, grid.tile_height, std::move(samples))});
    }
  }
  return tiles;
}

TilePolicy parse_tile_policy(const std::string& name) {
  if (name == "discard" || name == "discard-partial") return TilePolicy::kDiscardPartial;
  if (name == "pad" || name == "pad-replicate") return TilePolicy::kPadReplicate;
  fail(ErrorKind::kInvalidArgument, "unknown tile policy '" + name + "' (discard|pad)");
}

}  // namespace nucseg
