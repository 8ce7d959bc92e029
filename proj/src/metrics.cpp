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

#include "nucseg/metrics.hpp"

#include <json.hpp>

#include <cstdio>

#include "nucseg/image_io.hpp"
#include "nucseg/parallel.hpp"

namespace fs = std::filesystem;

namespace nucseg {

OverlapCounts overlap(const BinaryMask& target, const BinaryMask& pred) {
  require_same_size(target, pred, "target/prediction");
  OverlapCounts c;
  const auto t = target.data();
  const auto p = pred.data();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const bool a = t[i] != 0;
    const bool b = p[i] != 0;
    c.target += a;
    c.pred += b;
    c.intersection += a && b;
    c.union_size += a || b;
  }
  return c;
}

double iou(const OverlapCounts& c) {
  if (c.union_size == 0) return 1.0;
  return static_cast<double>(c.intersection) / static_cast<double>(c.union_size);
}

double dice(const OverlapCounts& c) {
  const std::size_t denom = c.target + c.pred;
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(c.intersection) / static_cast<double>(denom);
}

double iou(const BinaryMask& target, const BinaryMask& pred) {
  return iou(overlap(target, pred));
}

double dice(const BinaryMask& target, const BinaryMask& pred) {
  return dice(overlap(target, pred));
}

MetricsRow make_row(std::string id, const BinaryMask& target, const BinaryMask& pred) {
  const OverlapCounts c = overlap(target, pred);
  return {std::move(id), iou(c), dice(c), c.target, c.pred, c.intersection};
}

MetricsReport make_report(std::vector<MetricsRow> rows) {
  MetricsReport r;
  r.count = rows.size();
  double sum_iou = 0.0;
  double sum_dice = 0.0;
  for (const auto& row : rows) {
    sum_iou += row.iou;
    sum_dice += row.dice;
  }
  if (r.count > 0) {
    r.mean_iou = sum_iou / static_cast<double>(r.count);
    r.mean_dice = sum_dice / static_cast<double>(r.count);
  }
  r.rows = std::move(rows);
  return r;
}

MetricsReport evaluate(const fs::path& dataset_dir, const std::vector<std::string>& ids,
                       const fs::path& pred_dir, const EvaluateOptions& options) {
  options.postprocess.validate();
  std::string missing;
  for (const auto& id : ids) {
    if (!fs::exists(pred_dir / (id + ".png"))) missing += (missing.empty() ? "" : ",") + id;
  }
  if (!missing.empty()) {
    fail(ErrorKind::kMissingInput, "no prediction for ids: " + missing);
  }
  std::vector<MetricsRow> rows(ids.size());
  parallel_for(ids.size(), options.threads, [&](std::size_t i) {
    const BinaryMask target = read_png_mask(dataset_dir / "masks" / (ids[i] + ".png"));
    const ProbMap pm = read_png_prob(pred_dir / (ids[i] + ".png"));
    const BinaryMask pred = options.apply_postprocess
                                ? postprocess(pm, options.postprocess)
                                : threshold_binary(as_gray(pm), 127);
    rows[i] = make_row(ids[i], target, pred);
  });
  return make_report(std::move(rows));
}

namespace {

std::string format_fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string report_to_csv(const MetricsReport& report) {
  std::string out = "id,iou,dice,target_px,pred_px,intersection_px\n";
  std::size_t t = 0, p = 0, i = 0;
  for (const auto& row : report.rows) {
    out += row.id + "," + format_fixed(row.iou) + "," + format_fixed(row.dice) + "," +
           std::to_string(row.target_px) + "," + std::to_string(row.pred_px) + "," +
           std::to_string(row.intersection_px) + "\n";
    t += row.target_px;
    p += row.pred_px;
    i += row.intersection_px;
  }
  out += "MEAN," + format_fixed(report.mean_iou) + "," + format_fixed(report.mean_dice) + "," +
         std::to_string(t) + "," + std::to_string(p) + "," + std::to_string(i) + "\n";
  return out;
}

std::string report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["count"] = report.count;
  j["mean_iou"] = report.mean_iou;
  j["mean_dice"] = report.mean_dice;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"id", r.id},
                    {"iou", r.iou},
                    {"dice", r.dice},
                    {"target_px", r.target_px},
                    {"pred_px", r.pred_px},
                    {"intersection_px", r.intersection_px}});
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

}  // namespace nucseg
