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

#include "nucseg/baseline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nucseg/errors.hpp"

namespace nucseg::baseline {
namespace {

constexpr int kHalf = kWindow / 2;
constexpr int kArea = kWindow * kWindow;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit_of(const Weights& wt, std::span<const float, kFeatureCount> x) {
  double z = wt.b;
  for (int k = 0; k < kFeatureCount; ++k) z += wt.w[k] * static_cast<double>(x[k]);
  return z;
}

}  // namespace

FeatureMap extract_features(const RasterImage& img) {
  const int w = img.width();
  const int h = img.height();
  const int pw = w + 2 * kHalf;
  const int ph = h + 2 * kHalf;
  const auto src = img.data();

  FeatureMap out;
  out.width = w;
  out.height = h;
  out.values.resize(out.pixels() * kFeatureCount);

  // Integral images of v and v^2 over the replicate-padded channel; integer
  // sums keep constant windows at exactly zero variance.
  std::vector<std::int64_t> s1(static_cast<std::size_t>(pw + 1) * (ph + 1));
  std::vector<std::int64_t> s2(s1.size());
  auto idx = [pw](int x, int y) { return static_cast<std::size_t>(y) * (pw + 1) + x; };

  for (int c = 0; c < 3; ++c) {
    const double mean = kImagenetMean[c];
    const double sd = kImagenetStd[c];
    std::fill(s1.begin(), s1.end(), 0);
    std::fill(s2.begin(), s2.end(), 0);
    for (int py = 0; py < ph; ++py) {
      const int sy = clamp_index(py - kHalf, h);
      std::int64_t row1 = 0;
      std::int64_t row2 = 0;
      for (int px = 0; px < pw; ++px) {
        const int sx = clamp_index(px - kHalf, w);
        const std::int64_t v = src[(static_cast<std::size_t>(sy) * w + sx) * 3 + c];
        row1 += v;
        row2 += v * v;
        s1[idx(px + 1, py + 1)] = s1[idx(px + 1, py)] + row1;
        s2[idx(px + 1, py + 1)] = s2[idx(px + 1, py)] + row2;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * w + x;
        const int x1 = x + kWindow;
        const int y1 = y + kWindow;
        const std::int64_t sum1 = s1[idx(x1, y1)] - s1[idx(x, y1)] - s1[idx(x1, y)] + s1[idx(x, y)];
        const std::int64_t sum2 = s2[idx(x1, y1)] - s2[idx(x, y1)] - s2[idx(x1, y)] + s2[idx(x, y)];
        const double value = src[p * 3 + c];
        const double local_mean = static_cast<double>(sum1) / kArea;
        const double spread = std::sqrt(static_cast<double>(kArea * sum2 - sum1 * sum1)) / kArea;
        float* f = &out.values[p * kFeatureCount];
        f[c] = static_cast<float>((value / 255.0 - mean) / sd);
        f[3 + c] = static_cast<float>((local_mean / 255.0 - mean) / sd);
        f[6 + c] = static_cast<float>(spread / 255.0 / sd);
      }
    }
  }
  return out;
}

ProbMap predict(const Weights& weights, const FeatureMap& features) {
  std::vector<std::uint8_t> out(features.pixels());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double p = sigmoid(logit_of(weights, features.at(i)));
    out[i] = static_cast<std::uint8_t>(std::clamp(std::floor(255.0 * p + 0.5), 0.0, 255.0));
  }
  return ProbMap(features.width, features.height, std::move(out));
}

ProbMap predict(const Weights& weights, const RasterImage& img) {
  return predict(weights, extract_features(img));
}

LossGrad loss_and_grad(const Weights& weights, std::span<const Example> batch,
                       double weight_decay) {
  LossGrad out;
  std::size_t total = 0;
  for (const auto& ex : batch) {
    if (ex.features->width != ex.target->width() ||
        ex.features->height != ex.target->height()) {
      fail(ErrorKind::kDimensionMismatch, "features and target differ in size");
    }
    const auto target = ex.target->data();
    for (std::size_t i = 0; i < ex.features->pixels(); ++i) {
      const auto x = ex.features->at(i);
      const double z = logit_of(weights, x);
      if (!std::isfinite(z)) fail(ErrorKind::kNumeric, "non-finite logit in loss evaluation");
      const double p = sigmoid(z);
      const double pc = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
      const bool y = target[i] != 0;
      out.loss -= y ? std::log(pc) : std::log(1.0 - pc);
      // The clamp is flat outside its range, so the gradient vanishes there.
      if (p == pc) {
        const double dz = p - (y ? 1.0 : 0.0);
        for (int k = 0; k < kFeatureCount; ++k) out.grad_w[k] += dz * x[k];
        out.grad_b += dz;
      }
    }
    total += ex.features->pixels();
  }
  if (total == 0) fail(ErrorKind::kInvalidArgument, "loss over an empty batch");
  const double inv = 1.0 / static_cast<double>(total);
  out.loss *= inv;
  out.grad_b *= inv;
  double sq = 0.0;
  for (int k = 0; k < kFeatureCount; ++k) {
    out.grad_w[k] = out.grad_w[k] * inv + weight_decay * weights.w[k];
    sq += weights.w[k] * weights.w[k];
  }
  out.loss += 0.5 * weight_decay * sq;
  if (!std::isfinite(out.loss)) fail(ErrorKind::kNumeric, "non-finite loss");
  return out;
}

LossGrad loss_and_grad(const Weights& weights, const FeatureMap& features,
                       const BinaryMask& target, double weight_decay) {
  const Example ex{&features, &target};
  return loss_and_grad(weights, std::span<const Example>(&ex, 1), weight_decay);
}

RasterImage downsample_image(const RasterImage& img, int factor) {
  if (factor < 1) fail(ErrorKind::kInvalidArgument, "downsample factor must be >= 1");
  if (factor == 1) return img;
  const int w = img.width() / factor;
  const int h = img.height() / factor;
  if (w < 1 || h < 1) fail(ErrorKind::kInvalidArgument, "image too small to downsample");
  RasterImage out(w, h);
  const int area = factor * factor;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::array<int, 3> acc{};
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) {
          const Rgb p = img.at(x * factor + dx, y * factor + dy);
          for (int c = 0; c < 3; ++c) acc[c] += p[c];
        }
      }
      Rgb v;
      for (int c = 0; c < 3; ++c) v[c] = static_cast<std::uint8_t>((acc[c] + area / 2) / area);
      out.set(x, y, v);
    }
  }
  return out;
}

BinaryMask downsample_mask(const BinaryMask& mask, int factor) {
  if (factor < 1) fail(ErrorKind::kInvalidArgument, "downsample factor must be >= 1");
  if (factor == 1) return mask;
  const int w = mask.width() / factor;
  const int h = mask.height() / factor;
  if (w < 1 || h < 1) fail(ErrorKind::kInvalidArgument, "mask too small to downsample");
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.set(x, y, mask.test(x * factor + factor / 2, y * factor + factor / 2));
    }
  }
  return out;
}

int steps_per_epoch(std::size_t n, int batch) {
  return static_cast<int>((n + static_cast<std::size_t>(batch) - 1) / static_cast<std::size_t>(batch));
}

Weights initial_weights(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x77656967687473ULL));
  Weights w;
  for (auto& v : w.w) v = 0.01 * rng.normal();
  return w;
}

namespace {

struct StageData {
  std::vector<Sample> samples;
  std::vector<FeatureMap> features;
};

int stage_factor(const StagePlan& plan, const Stage& stage) {
  const Stage& full = plan.stages.back();
  if (stage.width < 1 || full.width % stage.width != 0) {
    fail(ErrorKind::kInvalidArgument, "stage width does not divide the final stage width");
  }
  return full.width / stage.width;
}

StageData prepare_stage(std::span<const Sample> samples, int factor, bool with_features) {
  StageData data;
  data.samples.reserve(samples.size());
  for (const auto& s : samples) {
    data.samples.push_back({downsample_image(s.image, factor), downsample_mask(s.mask, factor)});
    if (with_features) data.features.push_back(extract_features(data.samples.back().image));
  }
  return data;
}

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

struct Optimizer {
  std::array<double, kFeatureCount> vw{};
  double vb = 0.0;

  void step(Weights& wt, const LossGrad& g, StepValue sv, bool frozen) {
    if (!frozen) {
      for (int k = 0; k < kFeatureCount; ++k) {
        vw[k] = sv.momentum * vw[k] + g.grad_w[k];
        wt.w[k] -= sv.lr * vw[k];
      }
    }
    vb = sv.momentum * vb + g.grad_b;
    wt.b -= sv.lr * vb;
  }
};

}  // namespace

TrainResult train(std::span<const Sample> samples, const StagePlan& plan,
                  const TrainOptions& options) {
  if (samples.empty()) fail(ErrorKind::kInvalidArgument, "training split is empty");
  if (plan.stages.empty()) fail(ErrorKind::kInvalidArgument, "plan has no stages");
  if (options.augment) options.augment_config.validate();

  TrainResult result;
  result.weights = options.start ? *options.start : initial_weights(options.seed);
  Weights& wt = result.weights;

  if (options.only_stage && *options.only_stage >= plan.stages.size()) {
    fail(ErrorKind::kInvalidArgument, "stage index out of range");
  }
  for (std::size_t k = 0; k < plan.stages.size(); ++k) {
    if (options.only_stage && k != *options.only_stage) continue;
    const Stage& stage = plan.stages[k];
    const int factor = stage_factor(plan, stage);
    StageData data = prepare_stage(samples, factor, !options.augment);
    const int spe = steps_per_epoch(samples.size(), stage.batch);
    const bool plan_fits = stage.steps_per_epoch == spe &&
                           stage.steps.size() == static_cast<std::size_t>(
                               (stage.frozen_epochs + stage.unfrozen_epochs) * spe);
    const std::vector<StepValue> steps =
        plan_fits ? stage.steps : stage_steps(stage, plan.curve, spe);
    if (options.log) {
      options.log("stage " + std::to_string(k + 1) + ": " +
                  std::to_string(data.samples.front().image.width()) + "x" +
                  std::to_string(data.samples.front().image.height()) + ", batch " +
                  std::to_string(stage.batch) + ", " + std::to_string(steps.size()) +
                  " steps, lr_max " + std::to_string(stage.lr_max));
    }

    std::size_t cursor = 0;
    const int epochs = stage.frozen_epochs + stage.unfrozen_epochs;
    Optimizer opt;
    for (int epoch = 0; epoch < epochs; ++epoch) {
      const bool frozen = epoch < stage.frozen_epochs;
      if (epoch == stage.frozen_epochs) opt = Optimizer{};
      Rng order_rng(derive_seed(options.seed, (k << 32) | static_cast<std::uint64_t>(epoch)));
      const auto order = shuffled(data.samples.size(), order_rng);
      for (std::size_t start = 0; start < order.size(); start += stage.batch) {
        const std::size_t end = std::min(order.size(), start + stage.batch);
        std::vector<FeatureMap> augmented_features;
        std::vector<BinaryMask> augmented_masks;
        std::vector<Example> batch;
        if (options.augment) {
          augmented_features.reserve(end - start);
          augmented_masks.reserve(end - start);
          for (std::size_t i = start; i < end; ++i) {
            Rng aug_rng(derive_seed(options.seed ^ (k << 48),
                                    static_cast<std::uint64_t>(epoch) * 1000003ULL + order[i]));
            auto [img, mask] = augment(data.samples[order[i]].image,
                                       data.samples[order[i]].mask,
                                       options.augment_config, aug_rng);
            augmented_features.push_back(extract_features(img));
            augmented_masks.push_back(std::move(mask));
          }
          for (std::size_t i = 0; i < augmented_features.size(); ++i) {
            batch.push_back({&augmented_features[i], &augmented_masks[i]});
          }
        } else {
          for (std::size_t i = start; i < end; ++i) {
            batch.push_back({&data.features[order[i]], &data.samples[order[i]].mask});
          }
        }
        const LossGrad g = loss_and_grad(wt, batch, stage.weight_decay);
        result.loss_history.push_back(g.loss);
        opt.step(wt, g, steps[cursor++], frozen);
      }
    }
  }
  return result;
}

std::vector<double> lr_range_test(std::span<const Sample> samples, const Stage& stage,
                                  const Weights& start, const LrFinderConfig& cfg,
                                  std::uint64_t seed) {
  if (samples.empty()) fail(ErrorKind::kInvalidArgument, "lr range test needs samples");
  const auto lrs = lr_sweep(cfg);
  const int full_width = samples.front().image.width();
  const int factor = std::max(1, full_width / std::max(1, stage.width));
  StageData data = prepare_stage(samples, factor, true);

  Weights wt = start;
  Optimizer opt;
  DivergenceMonitor monitor(cfg.beta, cfg.divergence_factor);
  std::vector<double> losses;
  Rng rng(derive_seed(seed, 0x6c7266696e64ULL));
  auto order = shuffled(data.samples.size(), rng);
  std::size_t cursor = 0;
  for (double lr : lrs) {
    std::vector<Example> batch;
    for (int b = 0; b < stage.batch; ++b) {
      if (cursor == order.size()) {
        order = shuffled(data.samples.size(), rng);
        cursor = 0;
      }
      const std::size_t i = order[cursor++];
      batch.push_back({&data.features[i], &data.samples[i].mask});
    }
    double loss;
    LossGrad g;
    try {
      g = loss_and_grad(wt, batch, stage.weight_decay);
      loss = g.loss;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNumeric) throw;
      loss = std::numeric_limits<double>::infinity();
    }
    losses.push_back(loss);
    if (monitor.push(loss)) break;
    opt.step(wt, g, {lr, 0.9}, false);
  }
  return losses;
}

std::string weights_to_json(const Weights& w) {
  nlohmann::ordered_json j;
  j["format_version"] = kWeightsFormatVersion;
  j["model"] = "pixel-logistic";
  j["w"] = w.w;
  j["b"] = w.b;
  return j.dump(2) + "\n";
}

Weights weights_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kWeightsFormatVersion) {
      fail(ErrorKind::kParse, "unsupported weights format version " + std::to_string(version));
    }
    Weights w;
    w.w = j.at("w").get<std::array<double, kFeatureCount>>();
    w.b = j.at("b").get<double>();
    for (double v : w.w) {
      if (!std::isfinite(v)) fail(ErrorKind::kParse, "non-finite weight");
    }
    if (!std::isfinite(w.b)) fail(ErrorKind::kParse, "non-finite bias");
    return w;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("weights file: ") + e.what());
  }
}

}  // namespace nucseg::baseline
