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

#include "nucseg/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "nucseg/file_util.hpp"
#include "nucseg/imaging.hpp"

namespace fs = std::filesystem;

namespace nucseg {

std::size_t round_half_up_count(double ratio, std::size_t n) {
  // The epsilon absorbs representation error in products such as 0.15 * 10.
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5 + 1e-9));
}

DatasetSplit split(const std::vector<std::string>& ids, std::uint64_t seed,
                   SplitRatios ratios) {
  if (ids.empty()) fail(ErrorKind::kInvalidArgument, "cannot split an empty id list");
  if (ratios.train < 0 || ratios.val < 0 || ratios.train + ratios.val > 1.0 + 1e-9) {
    fail(ErrorKind::kInvalidArgument, "split ratios must be non-negative and sum to <= 1");
  }
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      fail(ErrorKind::kInvalidArgument, "duplicate sample id '" + id + "'");
    }
  }

  std::vector<std::string> order = ids;
  Rng rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const std::size_t j = rng.below(i + 1);
    std::swap(order[i], order[j]);
  }

  const std::size_t n = order.size();
  const std::size_t n_train = std::min(n, round_half_up_count(ratios.train, n));
  const std::size_t n_val = std::min(n - n_train, round_half_up_count(ratios.val, n));

  DatasetSplit out;
  out.seed = seed;
  out.train.assign(order.begin(), order.begin() + n_train);
  out.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  out.test.assign(order.begin() + n_train + n_val, order.end());
  return out;
}

void AugmentConfig::validate() const {
  for (double p : {flip_prob, affine_prob, lighting_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      fail(ErrorKind::kInvalidArgument, "augmentation probabilities must lie in [0, 1]");
    }
  }
  if (!(min_zoom >= 1.0 && max_zoom >= min_zoom)) {
    fail(ErrorKind::kInvalidArgument, "zoom range must satisfy 1 <= min <= max");
  }
  if (!(max_rotate_deg >= 0.0)) {
    fail(ErrorKind::kInvalidArgument, "rotation range must be non-negative");
  }
  if (!(max_lighting >= 0.0 && max_lighting < 1.0)) {
    fail(ErrorKind::kInvalidArgument, "max_lighting must lie in [0, 1)");
  }
}

AugmentParams draw_augment_params(const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  AugmentParams p;
  // Every draw consumes the same number of variates so later samples do not
  // depend on earlier coin flips.
  const bool flip = rng.bernoulli(cfg.flip_prob);
  const bool rotate = rng.bernoulli(cfg.affine_prob);
  const double angle = rng.uniform(-cfg.max_rotate_deg, cfg.max_rotate_deg);
  const bool zoom = rng.bernoulli(cfg.affine_prob);
  const double zoom_value = rng.uniform(cfg.min_zoom, cfg.max_zoom);
  const bool bright = rng.bernoulli(cfg.lighting_prob);
  const double bright_value =
      rng.uniform(0.5 - cfg.max_lighting / 2.0, 0.5 + cfg.max_lighting / 2.0);
  const bool contrast = rng.bernoulli(cfg.lighting_prob);
  const double log_lo = std::log(1.0 - cfg.max_lighting);
  const double contrast_value = std::exp(rng.uniform(log_lo, -log_lo));

  p.flip = flip;
  if (rotate) p.angle_deg = angle;
  if (zoom) p.zoom = zoom_value;
  if (bright) p.brightness = bright_value;
  if (contrast) p.contrast = contrast_value;
  return p;
}

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace

std::pair<RasterImage, BinaryMask> apply_augment(const RasterImage& img,
                                                 const BinaryMask& mask,
                                                 const AugmentParams& params) {
  require_same_size(img, mask, "augment image/mask");
  const int w = img.width();
  const int h = img.height();

  RasterImage out_img = img;
  BinaryMask out_mask = mask;

  if (params.flip) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        out_img.set(x, y, img.at(w - 1 - x, y));
        out_mask.set(x, y, mask.test(w - 1 - x, y));
      }
    }
  }

  if (params.angle_deg != 0.0 || params.zoom != 1.0) {
    const RasterImage src_img = out_img;
    const BinaryMask src_mask = out_mask;
    const double theta = params.angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta) / params.zoom;
    const double s = std::sin(theta) / params.zoom;
    const double cx = (w - 1) / 2.0;
    const double cy = (h - 1) / 2.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        // Inverse map: output pixel -> source location.
        const double dx = x - cx;
        const double dy = y - cy;
        const double sx = cx + c * dx + s * dy;
        const double sy = cy - s * dx + c * dy;

        const int nx = clamp_index(static_cast<int>(std::floor(sx + 0.5)), w);
        const int ny = clamp_index(static_cast<int>(std::floor(sy + 0.5)), h);
        out_mask.set(x, y, src_mask.test(nx, ny));

        const double fx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
        const double fy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
        const int x0 = static_cast<int>(std::floor(fx));
        const int y0 = static_cast<int>(std::floor(fy));
        const int x1 = std::min(x0 + 1, w - 1);
        const int y1 = std::min(y0 + 1, h - 1);
        const double ax = fx - x0;
        const double ay = fy - y0;
        const Rgb p00 = src_img.at(x0, y0);
        const Rgb p10 = src_img.at(x1, y0);
        const Rgb p01 = src_img.at(x0, y1);
        const Rgb p11 = src_img.at(x1, y1);
        Rgb v;
        for (int ch = 0; ch < 3; ++ch) {
          const double top = p00[ch] + ax * (p10[ch] - p00[ch]);
          const double bottom = p01[ch] + ax * (p11[ch] - p01[ch]);
          v[ch] = to_u8(top + ay * (bottom - top));
        }
        out_img.set(x, y, v);
      }
    }
  }

  if (params.brightness != 0.5 || params.contrast != 1.0) {
    const double shift = logit(params.brightness);
    std::array<std::uint8_t, 256> lut;
    for (int v = 0; v < 256; ++v) {
      const double x = std::clamp(v / 255.0, 1e-6, 1.0 - 1e-6);
      const double z = (logit(x) + shift) * params.contrast;
      lut[v] = to_u8(sigmoid(z) * 255.0);
    }
    for (auto& sample : out_img.data()) sample = lut[sample];
  }

  return {std::move(out_img), std::move(out_mask)};
}

std::pair<RasterImage, BinaryMask> augment(const RasterImage& img,
                                           const BinaryMask& mask,
                                           const AugmentConfig& cfg, Rng& rng) {
  require_same_size(img, mask, "augment image/mask");
  return apply_augment(img, mask, draw_augment_params(cfg, rng));
}

std::array<RealPlane, 3> normalize(const RasterImage& img,
                                   const std::array<double, 3>& means,
                                   const std::array<double, 3>& stds) {
  for (double s : stds) {
    if (!(s > 0.0)) fail(ErrorKind::kInvalidArgument, "normalization std must be positive");
  }
  std::array<RealPlane, 3> planes = {RealPlane(img.width(), img.height()),
                                     RealPlane(img.width(), img.height()),
                                     RealPlane(img.width(), img.height())};
  const auto src = img.data();
  const std::size_t n = planes[0].data.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      planes[c].data[i] = (src[3 * i + c] / 255.0 - means[c]) / stds[c];
    }
  }
  return planes;
}

std::pair<RasterImage, BinaryMask> synth_sample(Rng& rng, int w, int h,
                                                CountRange nuclei) {
  if (w < 64 || h < 64) {
    fail(ErrorKind::kInvalidArgument, "synthetic samples need w, h >= 64");
  }
  if (nuclei.min < 0 || nuclei.max < nuclei.min) {
    fail(ErrorKind::kInvalidArgument, "invalid nucleus count range");
  }
  constexpr std::array<double, 3> kBackground = {236.0, 206.0, 224.0};
  constexpr std::array<double, 3> kNucleus = {118.0, 38.0, 112.0};
  constexpr double kBackgroundNoise = 4.0;
  constexpr double kNucleusNoise = 6.0;

  std::vector<double> rgb(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    const double shade = kBackgroundNoise * rng.normal();
    for (int c = 0; c < 3; ++c) {
      rgb[i + c] = kBackground[c] + shade + 0.5 * kBackgroundNoise * rng.normal();
    }
  }
  BinaryMask mask(w, h, false);

  const int count =
      nuclei.min + static_cast<int>(rng.below(static_cast<std::uint64_t>(nuclei.max - nuclei.min) + 1));
  const double base = std::min(w, h);
  for (int k = 0; k < count; ++k) {
    const double cx = rng.uniform(0.0, w);
    const double cy = rng.uniform(0.0, h);
    const double a = rng.uniform(0.05, 0.09) * base;
    const double b = a * rng.uniform(0.65, 1.0);
    const double phi = rng.uniform(0.0, std::numbers::pi);
    const double darkness = rng.uniform(0.8, 1.25);
    const bool defocused = rng.bernoulli(0.25);
    const double defocus_sigma = rng.uniform(1.0, 2.0);

    const double cph = std::cos(phi);
    const double sph = std::sin(phi);
    const int pad = defocused ? static_cast<int>(std::ceil(3 * defocus_sigma)) + 1 : 1;
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - a)) - pad);
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(cx + a)) + pad);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - a)) - pad);
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(cy + a)) + pad);
    const int bw = x1 - x0 + 1;
    const int bh = y1 - y0 + 1;

    RealPlane inside(bw, bh, 0.0);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        const double u = (dx * cph + dy * sph) / a;
        const double v = (-dx * sph + dy * cph) / b;
        if (u * u + v * v <= 1.0) {
          inside.at(x - x0, y - y0) = 1.0;
          mask.set(x, y, true);
        }
      }
    }
    RealPlane alpha = inside;
    if (defocused) {
      const int ks = 2 * static_cast<int>(std::ceil(3 * defocus_sigma)) + 1;
      alpha = gaussian_blur(inside, ks, defocus_sigma);
      // Keep defocused nuclei clearly darker than the background inside the
      // true outline; the halo spills outward only.
      for (std::size_t i = 0; i < alpha.data.size(); ++i) {
        if (inside.data[i] > 0.0) alpha.data[i] = std::max(alpha.data[i], 0.6);
      }
    }
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double al = alpha.at(x - x0, y - y0);
        if (al <= 0.0) continue;
        const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
        const double grain = kNucleusNoise * rng.normal();
        for (int c = 0; c < 3; ++c) {
          const double nuc = kNucleus[c] * darkness + grain;
          rgb[i + c] = al * nuc + (1.0 - al) * rgb[i + c];
        }
      }
    }
  }

  std::vector<std::uint8_t> samples(rgb.size());
  std::transform(rgb.begin(), rgb.end(), samples.begin(), to_u8);
  return {RasterImage(w, h, std::move(samples)), std::move(mask)};
}

std::vector<std::string> list_dataset_ids(const fs::path& dir) {
  const fs::path images = dir / "images";
  if (!fs::is_directory(images)) {
    fail(ErrorKind::kMissingInput, "dataset image directory not found: " + images.string());
  }
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(images)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

fs::path image_path(const fs::path& dir, const std::string& id) {
  return dir / "images" / (id + ".png");
}

fs::path mask_path(const fs::path& dir, const std::string& id) {
  return dir / "masks" / (id + ".png");
}

std::string split_to_json(const DatasetSplit& s) {
  nlohmann::ordered_json j;
  j["seed"] = s.seed;
  j["train"] = s.train;
  j["val"] = s.val;
  j["test"] = s.test;
  return j.dump(2) + "\n";
}

DatasetSplit split_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DatasetSplit s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("split.json: ") + e.what());
  }
}

void write_split(const fs::path& dir, const DatasetSplit& s) {
  write_file_atomic(dir / "split.json", split_to_json(s));
}

DatasetSplit read_split(const fs::path& dir) {
  return split_from_json(read_file(dir / "split.json"));
}

}  // namespace nucseg
