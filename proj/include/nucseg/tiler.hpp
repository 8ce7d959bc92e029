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
#include <vector>

#include "nucseg/image.hpp"

namespace nucseg {

enum class TilePolicy { kDiscardPartial, kPadReplicate };

struct TileGrid {
  int source_width = 0;
  int source_height = 0;
  int tile_width = 1600;
  int tile_height = 1200;
  int rows = 0;
  int cols = 0;
  TilePolicy policy = TilePolicy::kDiscardPartial;

  int count() const { return rows * cols; }
};

struct Tile {
  int row;
  int col;
  int x0;
  int y0;
  RasterImage image;

  /// row{r}_col{c}
  std::string name() const;
};

/// Non-overlapping grid anchored at (0, 0). Discard keeps only complete tiles
/// (floor); pad-replicate covers the whole source (ceil).
TileGrid plan_tiles(int src_w, int src_h, int tile_w, int tile_h,
                    TilePolicy policy = TilePolicy::kDiscardPartial);

/// Tiles in row-major order, each exactly tile_w x tile_h. Pixels beyond the
/// source edge replicate the nearest edge pixel.
std::vector<Tile> extract_tiles(const RasterImage& img, const TileGrid& grid);

TilePolicy parse_tile_policy(const std::string& name);

}  // namespace nucseg
