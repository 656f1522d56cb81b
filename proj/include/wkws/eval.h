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

#ifndef WKWS_EVAL_H_
#define WKWS_EVAL_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wkws/features.h"
#include "wkws/metrics.h"
#include "wkws/model.h"
#include "wkws/synth.h"

namespace wkws {

// Eval-mode softmax scores for each spectrogram. Items are grouped by
// frame count so no clip is ever padded, which makes every row
// independent of its batch mates.
std::vector<std::vector<double>> ScoreSpectrograms(
    const ModelParams& params, std::span<const LogMelSpectrogram> features,
    int batch_size = 64, int jobs = 1);

struct ClipScore {
  std::string record_id;
  int label = 0;
  std::vector<double> scores;
  int prediction = 0;
};

struct EvalReport {
  std::vector<ClipScore> clips;
  double accuracy = 0.0;
  std::vector<std::optional<double>> per_class_ap;
  double map = 0.0;
  std::vector<int> skipped_classes;
  std::vector<std::optional<RocCurve>> roc;
  double macro_auc = 0.0;
};

struct EvalOptions {
  int batch_size = 64;
  int jobs = 1;
  // Record ids are out_path relative to this directory.
  std::filesystem::path base_dir;
};

// Scores every record of a test-split manifest. Throws ValidationError if
// a record belongs to another split and IoError naming the record when
// audio is missing.
EvalReport Evaluate(const ModelParams& params, const DatasetManifest& manifest,
                    const EvalOptions& options = {});

// Aggregates per-clip scores into accuracy, AP, mAP and ROC.
EvalReport Summarize(std::vector<ClipScore> clips, int n_classes);

std::string ReportToJson(const EvalReport& report);
// class,threshold,fpr,tpr rows for every class with a defined curve.
std::string RocToCsv(const EvalReport& report);
EvalReport ReportFromJson(const std::string& text);

}  // namespace wkws

#endif  // WKWS_EVAL_H_
