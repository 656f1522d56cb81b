// Copyright 2026 The wkws Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wkws/eval.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "wkws/error.h"
#include "wkws/parallel.h"

namespace wkws {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::vector<std::vector<double>> ScoreSpectrograms(
    const ModelParams& params, std::span<const LogMelSpectrogram> features,
    int batch_size, int jobs) {
  std::map<int, std::vector<std::size_t>> by_length;
  for (std::size_t i = 0; i < features.size(); ++i) {
    by_length[features[i].frames].push_back(i);
  }
  std::vector<std::vector<std::size_t>> chunks;
  for (const auto& [frames, idx] : by_length) {
    for (std::size_t s = 0; s < idx.size(); s += batch_size) {
      chunks.emplace_back(idx.begin() + s,
                          idx.begin() + std::min(idx.size(), s + batch_size));
    }
  }
  std::vector<std::vector<double>> scores(features.size());
  const int classes = params.config.n_classes;
  ParallelFor(chunks.size(), jobs, [&](std::size_t c) {
    std::vector<BatchItem> items;
    for (std::size_t i : chunks[c]) items.push_back({&features[i], 0});
    const Batch batch = PadBatch(items);
    const std::vector<float> logits = ForwardEval(params, batch);
    for (std::size_t k = 0; k < chunks[c].size(); ++k) {
      scores[chunks[c][k]] = Softmax(
          std::span<const float>(logits.data() + k * classes, classes));
    }
  });
  return scores;
}

EvalReport Summarize(std::vector<ClipScore> clips, int n_classes) {
  if (clips.empty()) throw DomainError("nothing to evaluate");
  EvalReport report;
  std::vector<int> preds, labels;
  std::vector<double> matrix;
  for (auto& c : clips) {
    c.prediction = Argmax(c.scores);
    preds.push_back(c.prediction);
    labels.push_back(c.label);
    matrix.insert(matrix.end(), c.scores.begin(), c.scores.end());
  }
  report.accuracy = Accuracy(preds, labels);
  const MacroMapResult map = MacroMap(matrix, labels, n_classes);
  report.per_class_ap = map.per_class;
  report.map = map.map;
  report.skipped_classes = map.skipped;

  report.roc.resize(n_classes);
  double auc_sum = 0.0;
  int auc_count = 0;
  std::vector<double> column(labels.size());
  std::vector<bool> positives(labels.size());
  for (int k = 0; k < n_classes; ++k) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      column[i] = matrix[i * n_classes + k];
      positives[i] = labels[i] == k;
      pos += positives[i];
    }
    if (pos == 0 || pos == labels.size()) continue;
    report.roc[k] = RocPoints(column, positives);
    auc_sum += report.roc[k]->auc;
    ++auc_count;
  }
  report.macro_auc = auc_count > 0 ? auc_sum / auc_count : 0.0;
  report.clips = std::move(clips);
  return report;
}

EvalReport Evaluate(const ModelParams& params, const DatasetManifest& manifest,
                    const EvalOptions& options) {
  if (manifest.records.empty()) throw DomainError("manifest has no records");
  for (const auto& r : manifest.records) {
    if (r.split != Split::kTest) {
      throw ValidationError("evaluation expects a test-split manifest; " +
                            r.out_path.string() + " is " +
                            std::string(ToString(r.split)));
    }
  }
  const auto& records = manifest.records;
  std::vector<LogMelSpectrogram> features(records.size());
  ParallelFor(records.size(), options.jobs, [&](std::size_t i) {
    try {
      features[i] = LogMel(LoadClipForFeatures(records[i].out_path));
    } catch (const Error& e) {
      throw IoError("record " + std::to_string(i) + ": " + e.what());
    }
  });
  const auto scores =
      ScoreSpectrograms(params, features, options.batch_size, options.jobs);

  std::vector<ClipScore> clips(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    fs::path id = records[i].out_path;
    if (!options.base_dir.empty()) {
      id = fs::absolute(id).lexically_normal().lexically_relative(
          fs::absolute(options.base_dir).lexically_normal());
    }
    clips[i].record_id = id.generic_string();
    clips[i].label = records[i].label;
    clips[i].scores = scores[i];
  }
  return Summarize(std::move(clips), params.config.n_classes);
}

namespace {

ordered_json Optional(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::string ReportToJson(const EvalReport& report) {
  ordered_json j;
  j["num_clips"] = report.clips.size();
  j["accuracy"] = report.accuracy;
  j["map"] = report.map;
  j["macro_auc"] = report.macro_auc;
  ordered_json ap = ordered_json::array();
  for (const auto& v : report.per_class_ap) ap.push_back(Optional(v));
  j["per_class_ap"] = ap;
  j["skipped_classes"] = report.skipped_classes;
  ordered_json roc = ordered_json::array();
  for (const auto& curve : report.roc) {
    if (!curve) {
      roc.push_back(nullptr);
      continue;
    }
    ordered_json c;
    c["auc"] = curve->auc;
    ordered_json pts = ordered_json::array();
    for (const auto& p : curve->points) {
      ordered_json thr = std::isinf(p.threshold) ? ordered_json(nullptr)
                                                 : ordered_json(p.threshold);
      pts.push_back({thr, p.fpr, p.tpr});
    }
    c["points"] = pts;
    roc.push_back(c);
  }
  j["roc"] = roc;
  ordered_json clips = ordered_json::array();
  for (const auto& c : report.clips) {
    ordered_json o;
    o["record_id"] = c.record_id;
    o["label"] = c.label;
    o["prediction"] = c.prediction;
    o["scores"] = c.scores;
    clips.push_back(o);
  }
  j["clips"] = clips;
  return j.dump(2) + "\n";
}

EvalReport ReportFromJson(const std::string& text) {
  EvalReport r;
  try {
    const ordered_json j = ordered_json::parse(text);
    r.accuracy = j.at("accuracy").get<double>();
    r.map = j.at("map").get<double>();
    r.macro_auc = j.at("macro_auc").get<double>();
    for (const auto& v : j.at("per_class_ap")) {
      r.per_class_ap.push_back(v.is_null() ? std::nullopt
                                           : std::optional<double>(v.get<double>()));
    }
    r.skipped_classes = j.at("skipped_classes").get<std::vector<int>>();
    for (const auto& c : j.at("roc")) {
      if (c.is_null()) {
        r.roc.emplace_back();
        continue;
      }
      RocCurve curve;
      curve.auc = c.at("auc").get<double>();
      for (const auto& p : c.at("points")) {
        const double thr = p.at(0).is_null()
                               ? std::numeric_limits<double>::infinity()
                               : p.at(0).get<double>();
        curve.points.push_back({thr, p.at(1).get<double>(), p.at(2).get<double>()});
      }
      r.roc.push_back(std::move(curve));
    }
    for (const auto& o : j.at("clips")) {
      ClipScore c;
      c.record_id = o.at("record_id").get<std::string>();
      c.label = o.at("label").get<int>();
      c.prediction = o.at("prediction").get<int>();
      c.scores = o.at("scores").get<std::vector<double>>();
      r.clips.push_back(std::move(c));
    }
  } catch (const ordered_json::exception& e) {
    throw FormatError(std::string("bad report: ") + e.what());
  }
  return r;
}

std::string RocToCsv(const EvalReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "class,threshold,fpr,tpr\n";
  for (std::size_t k = 0; k < report.roc.size(); ++k) {
    if (!report.roc[k]) continue;
    for (const auto& p : report.roc[k]->points) {
      out << k << ",";
      if (std::isinf(p.threshold)) {
        out << "inf";
      } else {
        out << p.threshold;
      }
      out << "," << p.fpr << "," << p.tpr << "\n";
    }
  }
  return out.str();
}

}  // namespace wkws
