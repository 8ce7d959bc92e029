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

#include "nucseg/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>

#include "nucseg/file_util.hpp"

namespace nucseg {

void PipelineConfig::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorKind::kInvalidArgument, "config: " + m); };
  if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9) {
    bad("split ratios must sum to 1");
  }
  if (train_ratio < 0 || val_ratio < 0 || test_ratio < 0) bad("split ratios must be non-negative");
  if (tile_width < 1 || tile_height < 1) bad("tile size must be positive");
  if (synth_width < 64 || synth_height < 64) bad("synthetic image size must be at least 64");
  if (stages < 1) bad("stages must be positive");
  if (frozen_epochs < 0 || unfrozen_epochs < 0) bad("epoch counts must be non-negative");
  if (nuclei.min < 0 || nuclei.max < nuclei.min) bad("invalid nucleus count range");
  if (parallelism < 1) bad("parallelism must be positive");
  if (!(weight_decay >= 0.0)) bad("weight decay must be non-negative");
  postprocess.validate();
}

namespace {

const char* shape_name(ElementShape s) {
  return s == ElementShape::kSquare ? "square" : "ellipse";
}

ElementShape parse_shape(const std::string& s) {
  if (s == "square") return ElementShape::kSquare;
  if (s == "ellipse") return ElementShape::kEllipse;
  fail(ErrorKind::kInvalidArgument, "config: unknown element shape '" + s + "'");
}

}  // namespace

PipelineConfig config_from_json(const std::string& document, PipelineConfig cfg) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::kInvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    if (auto p = j.find("paths"); p != j.end()) {
      if (p->contains("dataset")) cfg.dataset_dir = p->at("dataset").get<std::string>();
      if (p->contains("predictions")) cfg.predictions_dir = p->at("predictions").get<std::string>();
      if (p->contains("reports")) cfg.reports_dir = p->at("reports").get<std::string>();
    }
    if (auto t = j.find("tile"); t != j.end()) {
      cfg.tile_width = t->value("width", cfg.tile_width);
      cfg.tile_height = t->value("height", cfg.tile_height);
      if (t->contains("policy")) cfg.tile_policy = parse_tile_policy(t->at("policy").get<std::string>());
    }
    if (auto s = j.find("split"); s != j.end()) {
      cfg.split_seed = s->value("seed", cfg.split_seed);
      cfg.train_ratio = s->value("train", cfg.train_ratio);
      cfg.val_ratio = s->value("val", cfg.val_ratio);
      cfg.test_ratio = s->value("test", cfg.test_ratio);
    }
    if (auto pp = j.find("postprocess"); pp != j.end()) {
      auto& c = cfg.postprocess;
      c.blur_kernel = pp->value("blur_kernel", c.blur_kernel);
      if (pp->contains("blur_sigma")) c.blur_sigma = pp->at("blur_sigma").get<double>();
      c.threshold = pp->value("threshold", c.threshold);
      c.erode_size = pp->value("erode_size", c.erode_size);
      c.open_size = pp->value("open_size", c.open_size);
      if (pp->contains("erode_shape")) c.erode_shape = parse_shape(pp->at("erode_shape"));
      if (pp->contains("open_shape")) c.open_shape = parse_shape(pp->at("open_shape"));
    }
    if (auto sc = j.find("schedule"); sc != j.end()) {
      cfg.stages = sc->value("stages", cfg.stages);
      if (sc->contains("lr_max")) cfg.lr_max = sc->at("lr_max").get<std::vector<double>>();
      if (sc->contains("batches")) cfg.batches = sc->at("batches").get<std::vector<int>>();
      cfg.frozen_epochs = sc->value("frozen_epochs", cfg.frozen_epochs);
      cfg.unfrozen_epochs = sc->value("unfrozen_epochs", cfg.unfrozen_epochs);
      cfg.weight_decay = sc->value("weight_decay", cfg.weight_decay);
      cfg.lr_find = sc->value("lr_find", cfg.lr_find);
    }
    if (auto sy = j.find("synth"); sy != j.end()) {
      cfg.synth_width = sy->value("width", cfg.synth_width);
      cfg.synth_height = sy->value("height", cfg.synth_height);
      cfg.nuclei.min = sy->value("min_nuclei", cfg.nuclei.min);
      cfg.nuclei.max = sy->value("max_nuclei", cfg.nuclei.max);
    }
    cfg.parallelism = j.value("parallelism", cfg.parallelism);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["paths"] = {{"dataset", cfg.dataset_dir.string()},
                {"predictions", cfg.predictions_dir.string()},
                {"reports", cfg.reports_dir.string()}};
  j["tile"] = {{"width", cfg.tile_width},
               {"height", cfg.tile_height},
               {"policy", cfg.tile_policy == TilePolicy::kDiscardPartial ? "discard" : "pad"}};
  j["split"] = {{"seed", cfg.split_seed},
                {"train", cfg.train_ratio},
                {"val", cfg.val_ratio},
                {"test", cfg.test_ratio}};
  nlohmann::ordered_json pp = {{"blur_kernel", cfg.postprocess.blur_kernel},
                               {"threshold", cfg.postprocess.threshold},
                               {"erode_shape", shape_name(cfg.postprocess.erode_shape)},
                               {"erode_size", cfg.postprocess.erode_size},
                               {"open_shape", shape_name(cfg.postprocess.open_shape)},
                               {"open_size", cfg.postprocess.open_size}};
  if (cfg.postprocess.blur_sigma) pp["blur_sigma"] = *cfg.postprocess.blur_sigma;
  j["postprocess"] = pp;
  nlohmann::ordered_json sc = {{"stages", cfg.stages},
                               {"frozen_epochs", cfg.frozen_epochs},
                               {"unfrozen_epochs", cfg.unfrozen_epochs},
                               {"weight_decay", cfg.weight_decay},
                               {"lr_find", cfg.lr_find}};
  if (cfg.lr_max) sc["lr_max"] = *cfg.lr_max;
  if (cfg.batches) sc["batches"] = *cfg.batches;
  j["schedule"] = sc;
  j["synth"] = {{"width", cfg.synth_width},
                {"height", cfg.synth_height},
                {"min_nuclei", cfg.nuclei.min},
                {"max_nuclei", cfg.nuclei.max}};
  j["parallelism"] = cfg.parallelism;
  return j.dump(2) + "\n";
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& explicit_path) {
  std::optional<std::filesystem::path> path = explicit_path;
  if (!path) {
    if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
      path = env;
    }
  }
  if (!path) return PipelineConfig{};
  require_exists(*path, "config file");
  return config_from_json(read_file(*path));
}

}  // namespace nucseg
