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

#ifndef WKWS_TRAIN_H_
#define WKWS_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wkws/audio.h"
#include "wkws/config.h"
#include "wkws/model.h"
#include "wkws/rng.h"

namespace wkws {

struct TrainConfig {
  int batch_size = 64;
  int max_epochs = 200;
  double lr = 0.001;
  // Random crop length applied to every training clip; absent = no crop.
  std::optional<double> crop_seconds;
  uint64_t seed = 0;
  int topk_average = 4;
  std::filesystem::path train_manifest;
  std::filesystem::path val_manifest;
  std::filesystem::path out_dir;
  ModelConfig model;
  // Threads for decoding and feature extraction. The update path is
  // sequential and results do not depend on this value.
  int jobs = 1;

  void Validate() const;
  // Overlays keys from a key=value map; unknown keys are an error.
  // Relative paths are resolved against base_dir when it is given.
  void Apply(const KeyValues& kv, const std::filesystem::path& base_dir = {});
  // Paths are written relative to relative_to when it is given.
  KeyValues ToKeyValues(const std::filesystem::path& relative_to = {}) const;
};

struct AdamState {
  std::vector<Tensor<float>> first_moment;
  std::vector<Tensor<float>> second_moment;
  int64_t step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

AdamState MakeAdamState(const ModelParams& params);

// Bias-corrected Adam on the trainable tensors. Throws TrainingError on a
// non-finite gradient, leaving params and state untouched.
void AdamStep(ModelParams& params, const GradientSet& grads, AdamState& state,
              double lr);

// Start of a crop_len window, uniform on [0, clip_len - crop_len].
int64_t DrawCropStart(Rng& rng, int64_t clip_len, int64_t crop_len);

AudioClip RandomCrop(const AudioClip& clip, double crop_seconds, Rng& rng);

struct LedgerEntry {
  int epoch = 0;
  double val_accuracy = 0.0;
  std::filesystem::path checkpoint;
};

// Sorted by validation accuracy descending, earlier epoch first on ties.
class CheckpointLedger {
 public:
  void Add(LedgerEntry entry);
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::vector<LedgerEntry> Top(std::size_t k) const;
  std::string ToCsv() const;

 private:
  std::vector<LedgerEntry> entries_;
};

// Elementwise mean of every tensor, running statistics included.
ModelParams AverageParams(std::span<const ModelParams> models);

// Loads and averages the min(k, size) best checkpoints of the ledger.
ModelParams AverageCheckpoints(const CheckpointLedger& ledger, std::size_t k);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double wall_seconds = 0.0;
};

std::string MetricsToCsv(std::span<const EpochMetrics> log, bool with_wall_clock = true);

struct TrainResult {
  ModelParams averaged;
  CheckpointLedger ledger;
  std::vector<EpochMetrics> log;
};

// Full loop: per epoch shuffle, optional waveform crop, log-mel, pad,
// backward, Adam; then validation accuracy in eval mode and a checkpoint.
// Finally averages the top-k checkpoints. Writes under config.out_dir:
// checkpoints/epoch_NNN.wkws, metrics.csv, ledger.csv, avg.wkws and the
// effective train.cfg.
TrainResult RunTraining(const TrainConfig& config);

}  // namespace wkws

#endif  // WKWS_TRAIN_H_
