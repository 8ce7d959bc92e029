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

#include "nucseg/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "nucseg/annotations.hpp"
#include "nucseg/baseline.hpp"
#include "nucseg/config.hpp"
#include "nucseg/dataset.hpp"
#include "nucseg/file_util.hpp"
#include "nucseg/image_io.hpp"
#include "nucseg/metrics.hpp"
#include "nucseg/parallel.hpp"
#include "nucseg/postprocess.hpp"
#include "nucseg/schedules.hpp"
#include "nucseg/tiler.hpp"

namespace fs = std::filesystem;

namespace nucseg {
namespace {

struct Context {
  PipelineConfig cfg;
  std::ostream& out;
  spdlog::logger& log;
};

std::string quoted(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') q += '\\';
    q += (c == '\n' ? ' ' : c);
  }
  return q + "\"";
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string> png_stems(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    fail(ErrorKind::kMissingInput, "directory not found: " + dir.string());
  }
  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") {
      stems.push_back(e.path().stem().string());
    }
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

// Flags shared by the stage-level subcommands; applied over the config.
struct CommonFlags {
  std::optional<std::string> config_path;
  std::optional<int> threads;
};

struct PostprocessFlags {
  std::optional<int> threshold;
  std::optional<int> blur_kernel;
  std::optional<double> blur_sigma;
  std::optional<int> erode_size;
  std::optional<int> open_size;

  void add_to(CLI::App* app) {
    app->add_option("--threshold", threshold, "Binarization threshold (strict >)");
    app->add_option("--blur-kernel", blur_kernel, "Odd Gaussian kernel size");
    app->add_option("--blur-sigma", blur_sigma, "Gaussian sigma");
    app->add_option("--erode-size", erode_size, "Odd elliptical erosion element size");
    app->add_option("--open-size", open_size, "Odd elliptical opening element size");
  }
  void apply(PostprocessConfig& c) const {
    if (threshold) c.threshold = *threshold;
    if (blur_kernel) c.blur_kernel = *blur_kernel;
    if (blur_sigma) c.blur_sigma = *blur_sigma;
    if (erode_size) c.erode_size = *erode_size;
    if (open_size) c.open_size = *open_size;
  }
};

struct ScheduleFlags {
  std::optional<std::string> lr_max;
  std::optional<std::string> batches;
  std::optional<int> stages;
  std::optional<int> frozen_epochs;
  std::optional<int> unfrozen_epochs;
  std::optional<double> weight_decay;

  void add_to(CLI::App* app) {
    app->add_option("--lr-max", lr_max, "Per-stage max learning rate, comma separated");
    app->add_option("--batches", batches, "Per-stage batch size, comma separated");
    app->add_option("--stages", stages, "Number of progressive-resizing stages");
    app->add_option("--frozen-epochs", frozen_epochs, "Epochs per stage with the model frozen");
    app->add_option("--unfrozen-epochs", unfrozen_epochs, "Epochs per stage fully trainable");
    app->add_option("--weight-decay", weight_decay, "L2 weight decay");
  }
  void apply(PipelineConfig& c) const;
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      T v;
      if constexpr (std::is_same_v<T, int>) {
        v = std::stoi(item, &used);
      } else {
        v = std::stod(item, &used);
      }
      if (used != item.size()) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      fail(ErrorKind::kInvalidArgument, std::string("invalid ") + what + " value '" + item + "'");
    }
  }
  if (values.empty()) fail(ErrorKind::kInvalidArgument, std::string("empty ") + what + " list");
  return values;
}

void ScheduleFlags::apply(PipelineConfig& c) const {
  if (lr_max) c.lr_max = parse_list<double>(*lr_max, "lr-max");
  if (batches) c.batches = parse_list<int>(*batches, "batches");
  if (stages) c.stages = *stages;
  if (frozen_epochs) c.frozen_epochs = *frozen_epochs;
  if (unfrozen_epochs) c.unfrozen_epochs = *unfrozen_epochs;
  if (weight_decay) c.weight_decay = *weight_decay;
}

StagePlan plan_from_config(const PipelineConfig& cfg, int base_w, int base_h) {
  PlanOverrides o;
  o.lr_max = cfg.lr_max;
  o.batches = cfg.batches;
  o.frozen_epochs = cfg.frozen_epochs;
  o.unfrozen_epochs = cfg.unfrozen_epochs;
  o.weight_decay = cfg.weight_decay;
  return progressive_plan(base_w, base_h, cfg.stages, o);
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

void cmd_tile(Context& ctx, const fs::path& input, const fs::path& out_dir) {
  const RasterImage img = read_png_rgb(input);
  const TileGrid grid = plan_tiles(img.width(), img.height(), ctx.cfg.tile_width,
                                   ctx.cfg.tile_height, ctx.cfg.tile_policy);
  const auto tiles = extract_tiles(img, grid);
  parallel_for(tiles.size(), ctx.cfg.parallelism, [&](std::size_t i) {
    write_png(out_dir / (tiles[i].name() + ".png"), tiles[i].image);
  });
  std::string manifest;
  for (const auto& t : tiles) {
    manifest += t.name() + ".png," + std::to_string(t.row) + "," + std::to_string(t.col) +
                "," + std::to_string(t.x0) + "," + std::to_string(t.y0) + "\n";
  }
  write_file_atomic(out_dir / "manifest.csv", manifest);
  ctx.log.info("cmd=tile rows={} cols={} tiles={}", grid.rows, grid.cols, tiles.size());
  ctx.out << "tiles=" << tiles.size() << "\n";
}

void cmd_rasterize(Context& ctx, const fs::path& ann_path, const fs::path& out) {
  const AnnotationSet ann = parse_annotations(read_file(ann_path));
  const BinaryMask mask = rasterize(ann);
  write_png(out, mask);
  ctx.log.info("cmd=rasterize shapes={} foreground_px={}", ann.shapes.size(), mask.count());
  ctx.out << "foreground_px=" << mask.count() << "\n";
}

std::string synth_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth_%04zu", i);
  return buf;
}

void cmd_synth(Context& ctx, std::size_t count, std::uint64_t seed, const fs::path& dir) {
  parallel_for(count, ctx.cfg.parallelism, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    auto [img, mask] = synth_sample(rng, ctx.cfg.synth_width, ctx.cfg.synth_height, ctx.cfg.nuclei);
    write_png(image_path(dir, synth_id(i)), img);
    write_png(mask_path(dir, synth_id(i)), mask);
  });
  ctx.log.info("cmd=synth count={} size={}x{} dir={}", count, ctx.cfg.synth_width,
               ctx.cfg.synth_height, quoted(dir.string()));
  ctx.out << "samples=" << count << "\n";
}

DatasetSplit cmd_split(Context& ctx, std::uint64_t seed, const fs::path& dir) {
  const auto ids = list_dataset_ids(dir);
  for (const auto& id : ids) require_exists(mask_path(dir, id), "mask for " + id);
  const DatasetSplit s = split(ids, seed, {ctx.cfg.train_ratio, ctx.cfg.val_ratio});
  write_split(dir, s);
  ctx.log.info("cmd=split n={} train={} val={} test={}", ids.size(), s.train.size(),
               s.val.size(), s.test.size());
  ctx.out << "train=" << s.train.size() << " val=" << s.val.size()
          << " test=" << s.test.size() << "\n";
  return s;
}

StagePlan cmd_schedule(Context& ctx, int base_w, int base_h, int steps_per_epoch,
                       const fs::path& out) {
  StagePlan plan = plan_from_config(ctx.cfg, base_w, base_h);
  attach_one_cycle(plan, steps_per_epoch);
  write_file_atomic(out, plan_to_json(plan));
  ctx.log.info("cmd=schedule stages={} epochs={} out={}", plan.stages.size(),
               plan.total_epochs(), quoted(out.string()));
  ctx.out << "stages=" << plan.stages.size() << " total_epochs=" << plan.total_epochs() << "\n";
  return plan;
}

std::vector<double> read_losses(const fs::path& path) {
  std::stringstream in(read_file(path));
  std::vector<double> losses;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      losses.push_back(std::stod(cell));
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header
      fail(ErrorKind::kParse, path.string() + " line " + std::to_string(lineno) +
                                  ": not a number");
    }
  }
  return losses;
}

void cmd_lrfind(Context& ctx, const fs::path& losses_path, const LrFinderConfig& cfg) {
  const auto losses = read_losses(losses_path);
  const LrFindResult r = lr_find(losses, cfg);
  nlohmann::ordered_json j;
  j["suggested_lr"] = r.suggested_lr;
  j["stop_index"] = r.stop_index;
  j["min_index"] = r.min_index;
  j["points"] = losses.size();
  ctx.out << j.dump() << "\n";
}

std::vector<baseline::Sample> load_samples(const fs::path& dir,
                                           const std::vector<std::string>& ids,
                                           int threads) {
  std::vector<baseline::Sample> samples(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    samples[i] = {read_png_rgb(image_path(dir, ids[i])), read_png_mask(mask_path(dir, ids[i]))};
    require_same_size(samples[i].image, samples[i].mask, ("sample " + ids[i]).c_str());
  });
  return samples;
}

// Trains stage by stage; with lr_find on, each stage's lr_max comes from a
// range test run from the weights the previous stage produced.
baseline::TrainResult train_with_plan(Context& ctx, std::span<const baseline::Sample> samples,
                                      StagePlan& plan, std::uint64_t seed, bool lr_find_each) {
  baseline::TrainOptions opts;
  opts.seed = seed;
  opts.log = [&](const std::string& m) { ctx.log.info("cmd=train-baseline msg={}", quoted(m)); };
  if (!lr_find_each) return baseline::train(samples, plan, opts);

  baseline::TrainResult total;
  total.weights = baseline::initial_weights(seed);
  for (std::size_t k = 0; k < plan.stages.size(); ++k) {
    Stage& stage = plan.stages[k];
    const LrFinderConfig finder;
    const auto losses = baseline::lr_range_test(samples, stage, total.weights, finder,
                                                derive_seed(seed, 0x1000 + k));
    const LrFindResult found = lr_find(losses, finder);
    stage.lr_max = found.suggested_lr;
    stage.steps_per_epoch = baseline::steps_per_epoch(samples.size(), stage.batch);
    stage.steps = stage_steps(stage, plan.curve, stage.steps_per_epoch);
    ctx.log.info("cmd=train-baseline stage={} lr_find_suggestion={} stop_index={}", k + 1,
                 fmt_double(found.suggested_lr), found.stop_index);

    baseline::TrainOptions stage_opts = opts;
    stage_opts.start = total.weights;
    stage_opts.only_stage = k;
    baseline::TrainResult part = baseline::train(samples, plan, stage_opts);
    total.weights = part.weights;
    total.loss_history.insert(total.loss_history.end(), part.loss_history.begin(),
                              part.loss_history.end());
  }
  return total;
}

void cmd_predict_one(Context& ctx, const baseline::Weights& w, const fs::path& image,
                     const fs::path& out) {
  const ProbMap pm = baseline::predict(w, read_png_rgb(image));
  write_png(out, pm);
  ctx.log.info("cmd=predict image={} out={}", quoted(image.string()), quoted(out.string()));
}

void predict_ids(Context& ctx, const baseline::Weights& w, const fs::path& dataset,
                 const std::vector<std::string>& ids, const fs::path& out_dir) {
  parallel_for(ids.size(), ctx.cfg.parallelism, [&](std::size_t i) {
    write_png(out_dir / (ids[i] + ".png"), baseline::predict(w, read_png_rgb(image_path(dataset, ids[i]))));
  });
  ctx.log.info("cmd=predict images={} out={}", ids.size(), quoted(out_dir.string()));
}

void postprocess_dir(Context& ctx, const fs::path& in, const fs::path& out) {
  const auto stems = png_stems(in);
  parallel_for(stems.size(), ctx.cfg.parallelism, [&](std::size_t i) {
    write_png(out / (stems[i] + ".png"),
              postprocess(read_png_prob(in / (stems[i] + ".png")), ctx.cfg.postprocess));
  });
  ctx.log.info("cmd=postprocess images={} out={}", stems.size(), quoted(out.string()));
}

MetricsReport evaluate_to(Context& ctx, const fs::path& dataset, const fs::path& pred,
                          const fs::path& report_path, bool apply_postprocess) {
  std::vector<std::string> ids;
  if (fs::exists(dataset / "split.json")) {
    ids = read_split(dataset).test;
  } else {
    ids = list_dataset_ids(dataset);
  }
  EvaluateOptions opts;
  opts.postprocess = ctx.cfg.postprocess;
  opts.apply_postprocess = apply_postprocess;
  opts.threads = ctx.cfg.parallelism;
  const MetricsReport report = evaluate(dataset, ids, pred, opts);
  write_file_atomic(report_path, report_to_csv(report));
  fs::path json_path = report_path;
  json_path.replace_extension(".json");
  write_file_atomic(json_path, report_to_json(report));
  ctx.log.info("cmd=evaluate images={} mean_iou={} mean_dice={}", report.count,
               fmt_double(report.mean_iou), fmt_double(report.mean_dice));
  ctx.out << "mean_iou=" << fmt_double(report.mean_iou)
          << " mean_dice=" << fmt_double(report.mean_dice) << " images=" << report.count << "\n";
  return report;
}

void cmd_overlay(Context& ctx, const fs::path& image, const fs::path& mask,
                 const std::optional<std::string>& target, const fs::path& out) {
  const RasterImage img = read_png_rgb(image);
  const BinaryMask pred = read_png_mask(mask);
  const RasterImage result = target ? overlay_iou(img, read_png_mask(*target), pred)
                                    : overlay_edges(img, pred);
  write_png(out, result);
  ctx.log.info("cmd=overlay mode={} out={}", target ? "iou" : "edges", quoted(out.string()));
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return kExitInvalidConfig;
    case ErrorKind::kMissingInput:
      return kExitMissingInput;
    default:
      return kExitFailure;
  }
}

void print_error(std::ostream& err, std::string_view cls, const std::string& message) {
  err << "error class=" << cls << " message=" << quoted(message) << "\n";
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
  spdlog::logger log("nucseg", sink);
  log.set_pattern("ts=%Y-%m-%dT%H:%M:%S.%e level=%l %v");

  CLI::App app{"nucseg: nucleus segmentation pipeline toolkit", "nucseg"};
  app.set_version_flag("--version",
                       std::string("nucseg ") + kToolkitVersion +
                           " (weights format " + std::to_string(baseline::kWeightsFormatVersion) +
                           ", schedule format 1, report format 1)");
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags common;
  app.add_option("--config", common.config_path,
                 std::string("Config document (default: $") + kConfigEnvVar + ")");
  app.add_option("--threads", common.threads, "Worker threads for per-image stages");

  std::function<void(Context&)> action;

  // tile
  auto* tile = app.add_subcommand("tile", "Split a large raster into fixed-size patches");
  std::string tile_input;
  std::string tile_out;
  std::optional<int> tile_w, tile_h;
  std::optional<std::string> tile_policy;
  tile->add_option("--input", tile_input, "Source PNG")->required();
  tile->add_option("--tile-width", tile_w, "Tile width (1600)");
  tile->add_option("--tile-height", tile_h, "Tile height (1200)");
  tile->add_option("--policy", tile_policy, "discard|pad");
  tile->add_option("--out-dir", tile_out, "Output directory")->required();
  tile->callback([&] {
    action = [&](Context& ctx) {
      if (tile_w) ctx.cfg.tile_width = *tile_w;
      if (tile_h) ctx.cfg.tile_height = *tile_h;
      if (tile_policy) ctx.cfg.tile_policy = parse_tile_policy(*tile_policy);
      ctx.cfg.validate();
      require_exists(tile_input, "input image");
      cmd_tile(ctx, tile_input, tile_out);
    };
  });

  // rasterize
  auto* rast = app.add_subcommand("rasterize", "Rasterize a polygon annotation document");
  std::string rast_ann;
  std::string rast_out;
  rast->add_option("--ann", rast_ann, "Annotation JSON")->required();
  rast->add_option("--out", rast_out, "Output mask PNG")->required();
  rast->callback([&] {
    action = [&](Context& ctx) { cmd_rasterize(ctx, rast_ann, rast_out); };
  });

  // synth
  auto* syn = app.add_subcommand("synth", "Generate a synthetic Feulgen-like dataset");
  std::size_t syn_count = 0;
  std::uint64_t syn_seed = 0;
  std::optional<std::string> syn_out;
  std::optional<int> syn_w, syn_h;
  syn->add_option("--count", syn_count, "Number of samples")->required();
  syn->add_option("--seed", syn_seed, "Seed")->required();
  syn->add_option("--out-dir", syn_out, "Dataset directory (config paths.dataset)");
  syn->add_option("--width", syn_w, "Image width (400)");
  syn->add_option("--height", syn_h, "Image height (300)");
  syn->callback([&] {
    action = [&](Context& ctx) {
      if (syn_w) ctx.cfg.synth_width = *syn_w;
      if (syn_h) ctx.cfg.synth_height = *syn_h;
      ctx.cfg.validate();
      cmd_synth(ctx, syn_count, syn_seed, syn_out.value_or(ctx.cfg.dataset_dir.string()));
    };
  });

  // split
  auto* spl = app.add_subcommand("split", "Write a seeded 70/15/15 split.json");
  std::optional<std::uint64_t> spl_seed;
  std::optional<std::string> spl_dir;
  spl->add_option("--seed", spl_seed, "Seed");
  spl->add_option("--dir", spl_dir, "Dataset directory (config paths.dataset)");
  spl->callback([&] {
    action = [&](Context& ctx) {
      cmd_split(ctx, spl_seed.value_or(ctx.cfg.split_seed),
                spl_dir.value_or(ctx.cfg.dataset_dir.string()));
    };
  });

  // schedule
  auto* sch = app.add_subcommand("schedule", "Write a progressive one-cycle schedule file");
  ScheduleFlags sch_flags;
  sch_flags.add_to(sch);
  int sch_steps = 0;
  int sch_w = 1600;
  int sch_h = 1200;
  std::string sch_out;
  sch->add_option("--steps", sch_steps, "Optimizer steps per epoch")->required();
  sch->add_option("--base-width", sch_w, "Full-resolution width");
  sch->add_option("--base-height", sch_h, "Full-resolution height");
  sch->add_option("--out", sch_out, "Output plan JSON")->required();
  sch->callback([&] {
    action = [&](Context& ctx) {
      sch_flags.apply(ctx.cfg);
      ctx.cfg.validate();
      cmd_schedule(ctx, sch_w, sch_h, sch_steps, sch_out);
    };
  });

  // lrfind
  auto* lrf = app.add_subcommand("lrfind", "Suggest a learning rate from range-test losses");
  std::string lrf_losses;
  LrFinderConfig lrf_cfg;
  lrf->add_option("--losses", lrf_losses, "CSV of losses (last column), one per sweep step")
      ->required();
  lrf->add_option("--lr-min", lrf_cfg.lr_min, "Sweep start (1e-7)");
  lrf->add_option("--lr-max", lrf_cfg.lr_max, "Sweep end (10)");
  lrf->add_option("--sweep-steps", lrf_cfg.steps, "Sweep length (100)");
  lrf->add_option("--beta", lrf_cfg.beta, "Loss smoothing (0.98)");
  lrf->add_option("--divergence", lrf_cfg.divergence_factor, "Divergence factor (4)");
  lrf->callback([&] { action = [&](Context& ctx) { cmd_lrfind(ctx, lrf_losses, lrf_cfg); }; });

  // train-baseline
  auto* trn = app.add_subcommand("train-baseline", "Train the per-pixel logistic baseline");
  std::optional<std::string> trn_dataset;
  std::string trn_plan;
  std::uint64_t trn_seed = 0;
  std::string trn_out;
  bool trn_lr_find = false;
  trn->add_option("--dataset", trn_dataset, "Dataset directory with split.json (config paths.dataset)");
  trn->add_option("--plan", trn_plan, "Schedule file")->required();
  trn->add_option("--seed", trn_seed, "Seed");
  trn->add_option("--out", trn_out, "Output weights file")->required();
  trn->add_flag("--lr-find", trn_lr_find, "Replace each stage's lr_max by a range-test suggestion");
  trn->callback([&] {
    action = [&](Context& ctx) {
      require_exists(trn_plan, "schedule file");
      StagePlan plan = plan_from_json(read_file(trn_plan));
      const fs::path dataset = trn_dataset.value_or(ctx.cfg.dataset_dir.string());
      const DatasetSplit s = read_split(dataset);
      const auto samples = load_samples(dataset, s.train, ctx.cfg.parallelism);
      const auto result =
          train_with_plan(ctx, samples, plan, trn_seed, trn_lr_find);
      write_file_atomic(trn_out, baseline::weights_to_json(result.weights));
      ctx.out << "steps=" << result.loss_history.size() << " final_loss="
              << fmt_double(result.loss_history.empty() ? 0.0 : result.loss_history.back())
              << "\n";
    };
  });

  // predict
  auto* prd = app.add_subcommand("predict", "Write probability maps with the baseline");
  std::string prd_weights;
  std::optional<std::string> prd_image, prd_out, prd_dataset, prd_out_dir;
  prd->add_option("--weights", prd_weights, "Weights file")->required();
  prd->add_option("--image", prd_image, "Single input PNG");
  prd->add_option("--out", prd_out, "Output probmap PNG (with --image)");
  prd->add_option("--dataset", prd_dataset, "Predict every test id of this dataset (config paths.dataset)");
  prd->add_option("--out-dir", prd_out_dir, "Output directory (config paths.predictions)");
  prd->callback([&] {
    action = [&](Context& ctx) {
      const auto w = baseline::weights_from_json(read_file(prd_weights));
      if (prd_image && prd_out) {
        cmd_predict_one(ctx, w, *prd_image, *prd_out);
      } else if (!prd_image && !prd_out) {
        const fs::path dataset = prd_dataset.value_or(ctx.cfg.dataset_dir.string());
        predict_ids(ctx, w, dataset, read_split(dataset).test,
                    prd_out_dir.value_or(ctx.cfg.predictions_dir.string()));
      } else {
        fail(ErrorKind::kInvalidArgument,
             "--image and --out must be given together");
      }
    };
  });

  // postprocess
  auto* pp = app.add_subcommand("postprocess", "Blur, threshold, erode and open probmaps");
  std::string pp_in;
  std::string pp_out;
  PostprocessFlags pp_flags;
  pp->add_option("--in", pp_in, "Directory of probmap PNGs")->required();
  pp->add_option("--out", pp_out, "Output mask directory")->required();
  pp_flags.add_to(pp);
  pp->callback([&] {
    action = [&](Context& ctx) {
      pp_flags.apply(ctx.cfg.postprocess);
      ctx.cfg.validate();
      postprocess_dir(ctx, pp_in, pp_out);
    };
  });

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "IoU/Dice of predictions against ground truth");
  std::optional<std::string> ev_dataset;
  std::optional<std::string> ev_pred;
  std::optional<std::string> ev_report;
  bool ev_masks = false;
  PostprocessFlags ev_flags;
  ev->add_option("--dataset", ev_dataset, "Dataset directory (config paths.dataset)");
  ev->add_option("--pred", ev_pred, "Probmaps named <id>.png (config paths.predictions)");
  ev->add_option("--report", ev_report,
                 "Report CSV, plus a .json twin (config paths.reports/report.csv)");
  ev->add_flag("--masks", ev_masks, "Predictions are finished masks; skip post-processing");
  ev_flags.add_to(ev);
  ev->callback([&] {
    action = [&](Context& ctx) {
      ev_flags.apply(ctx.cfg.postprocess);
      ctx.cfg.validate();
      evaluate_to(ctx, ev_dataset.value_or(ctx.cfg.dataset_dir.string()),
                  ev_pred.value_or(ctx.cfg.predictions_dir.string()),
                  ev_report ? fs::path(*ev_report) : ctx.cfg.reports_dir / "report.csv", !ev_masks);
    };
  });

  // overlay
  auto* ov = app.add_subcommand("overlay", "Render edge or intersection/union overlays");
  std::string ov_image;
  std::string ov_mask;
  std::optional<std::string> ov_target;
  std::string ov_out;
  ov->add_option("--image", ov_image, "Source RGB PNG")->required();
  ov->add_option("--mask", ov_mask, "Predicted mask PNG")->required();
  ov->add_option("--target", ov_target, "Ground-truth mask; switches to IoU overlay");
  ov->add_option("--out", ov_out, "Output PNG")->required();
  ov->callback([&] {
    action = [&](Context& ctx) { cmd_overlay(ctx, ov_image, ov_mask, ov_target, ov_out); };
  });

  // pipeline
  auto* pl = app.add_subcommand(
      "pipeline", "synth -> split -> schedule -> train -> predict -> postprocess -> evaluate");
  std::size_t pl_count = 50;
  std::uint64_t pl_seed = 0;
  std::string pl_work = "pipeline_run";
  std::optional<bool> pl_lr_find;
  ScheduleFlags pl_sched;
  PostprocessFlags pl_pp;
  pl->add_option("--synthetic", pl_count, "Number of synthetic samples (50)");
  pl->add_option("--seed", pl_seed, "Seed for every stochastic stage");
  pl->add_option("--work-dir", pl_work, "Working directory (pipeline_run)");
  pl->add_flag("--lr-find,!--no-lr-find", pl_lr_find,
               "Choose each stage's lr_max with the range test (default unless --lr-max)");
  pl_sched.add_to(pl);
  pl_pp.add_to(pl);
  pl->callback([&] {
    action = [&](Context& ctx) {
      pl_sched.apply(ctx.cfg);
      pl_pp.apply(ctx.cfg.postprocess);
      ctx.cfg.validate();
      const fs::path work = pl_work;
      const fs::path dataset = work / "dataset";
      const fs::path preds = work / "predictions";
      const fs::path masks = work / "postprocessed";
      const fs::path report = work / "reports" / "report.csv";
      cmd_synth(ctx, pl_count, pl_seed, dataset);
      const DatasetSplit s = cmd_split(ctx, pl_seed, dataset);
      if (s.test.empty() || s.train.empty()) {
        fail(ErrorKind::kInvalidArgument, "too few samples for a train/test split");
      }
      StagePlan plan = plan_from_config(ctx.cfg, ctx.cfg.synth_width, ctx.cfg.synth_height);
      // One schedule file, with per-stage step counts matching the train split.
      for (auto& st : plan.stages) {
        st.steps_per_epoch = baseline::steps_per_epoch(s.train.size(), st.batch);
        st.steps = stage_steps(st, plan.curve, st.steps_per_epoch);
      }
      write_file_atomic(work / "plan.json", plan_to_json(plan));
      ctx.out << "stages=" << plan.stages.size() << " total_epochs=" << plan.total_epochs()
              << "\n";
      const auto samples = load_samples(dataset, s.train, ctx.cfg.parallelism);
      const auto trained =
          train_with_plan(ctx, samples, plan, pl_seed,
                          pl_lr_find.value_or(ctx.cfg.lr_find && !ctx.cfg.lr_max));
      write_file_atomic(work / "weights.json", baseline::weights_to_json(trained.weights));
      predict_ids(ctx, trained.weights, dataset, s.test, preds);
      postprocess_dir(ctx, preds, masks);
      evaluate_to(ctx, dataset, preds, report, true);
      ctx.out << "report=" << report.string() << "\n";
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const bool bad_value = dynamic_cast<const CLI::ConversionError*>(&e) != nullptr ||
                           dynamic_cast<const CLI::ValidationError*>(&e) != nullptr;
    print_error(err, bad_value ? "InvalidConfig" : "Usage", e.what());
    if (!bad_value) err << app.help();
    return bad_value ? kExitInvalidConfig : kExitUsage;
  } catch (const Error& e) {
    print_error(err, error_kind_name(e.kind()), e.what());
    return exit_code_for(e.kind());
  }

  try {
    PipelineConfig cfg = load_config(common.config_path ? std::optional<fs::path>(*common.config_path)
                                                        : std::nullopt);
    if (common.threads) cfg.parallelism = *common.threads;
    cfg.validate();
    Context ctx{cfg, out, log};
    action(ctx);
    log.flush();
    return kExitOk;
  } catch (const Error& e) {
    log.flush();
    print_error(err, error_kind_name(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    log.flush();
    print_error(err, "Internal", e.what());
    return kExitFailure;
  }
}

int run_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace nucseg
