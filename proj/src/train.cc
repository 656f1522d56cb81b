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

#include "wkws/train.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "wkws/checkpoint.h"
#include "wkws/error.h"
#include "wkws/eval.h"
#include "wkws/features.h"
#include "wkws/manifest.h"
#include "wkws/metrics.h"
#include "wkws/parallel.h"

namespace wkws {
namespace fs = std::filesystem;

namespace {

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ValidationError("bad value for " + key + ": '" + value + "'");
  }
  return out;
}

std::vector<int> ParseIntList(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(ParseNumber<int>(key, item));
  if (out.empty()) throw ValidationError(key + " must list at least one value");
  return out;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

// Stream ids for the derived generators.
constexpr uint64_t kInitStream = 1;
constexpr uint64_t kShuffleStream = 2;
constexpr uint64_t kCropStream = 3;

std::vector<AudioClip> LoadClips(const DatasetManifest& manifest, int jobs) {
  std::vector<AudioClip> clips(manifest.records.size());
  ParallelFor(clips.size(), jobs, [&](std::size_t i) {
    try {
      clips[i] = LoadClipForFeatures(manifest.records[i].out_path);
    } catch (const Error& e) {
      throw IoError("record " + std::to_string(i) + ": " + e.what());
    }
  });
  return clips;
}

std::vector<LogMelSpectrogram> Featurize(const std::vector<AudioClip>& clips, int jobs) {
  std::vector<LogMelSpectrogram> out(clips.size());
  ParallelFor(clips.size(), jobs, [&](std::size_t i) { out[i] = LogMel(clips[i]); });
  return out;
}

}  // namespace

void TrainConfig::Validate() const {
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("lr must be positive");
  if (topk_average < 1) throw ValidationError("topk_average must be >= 1");
  if (crop_seconds && !(*crop_seconds > 0.0)) {
    throw ValidationError("crop_seconds must be positive");
  }
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
  if (model.stem_channels < 1 || model.block_channels.empty()) {
    throw ValidationError("invalid model shape");
  }
}

namespace {

fs::path ResolveAgainst(const std::string& value, const fs::path& base) {
  fs::path p(value);
  if (base.empty() || p.empty() || p.is_absolute()) return p;
  fs::path out = (base / p).lexically_normal();
  if (out.has_parent_path() && out.filename().empty()) out = out.parent_path();
  return out;
}

std::string RelativeTo(const fs::path& p, const fs::path& base) {
  if (base.empty() || p.empty()) return p.generic_string();
  return fs::absolute(p).lexically_normal()
      .lexically_relative(fs::absolute(base).lexically_normal())
      .generic_string();
}

}  // namespace

void TrainConfig::Apply(const KeyValues& kv, const fs::path& base_dir) {
  for (const auto& [key, value] : kv) {
    if (key == "batch_size") {
      batch_size = ParseNumber<int>(key, value);
    } else if (key == "max_epochs") {
      max_epochs = ParseNumber<int>(key, value);
    } else if (key == "lr") {
      lr = ParseNumber<double>(key, value);
    } else if (key == "crop_seconds") {
      if (value.empty() || value == "none") {
        crop_seconds.reset();
      } else {
        crop_seconds = ParseNumber<double>(key, value);
      }
    } else if (key == "seed") {
      seed = ParseNumber<uint64_t>(key, value);
    } else if (key == "topk_average") {
      topk_average = ParseNumber<int>(key, value);
    } else if (key == "train_manifest") {
      train_manifest = ResolveAgainst(value, base_dir);
    } else if (key == "val_manifest") {
      val_manifest = ResolveAgainst(value, base_dir);
    } else if (key == "out_dir") {
      out_dir = ResolveAgainst(value, base_dir);
    } else if (key == "jobs") {
      jobs = ParseNumber<int>(key, value);
    } else if (key == "stem_channels") {
      model.stem_channels = ParseNumber<int>(key, value);
    } else if (key == "block_channels") {
      model.block_channels = ParseIntList(key, value);
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
}

KeyValues TrainConfig::ToKeyValues(const fs::path& relative_to) const {
  KeyValues kv;
  kv["batch_size"] = std::to_string(batch_size);
  kv["max_epochs"] = std::to_string(max_epochs);
  kv["lr"] = FormatDouble(lr);
  kv["crop_seconds"] = crop_seconds ? FormatDouble(*crop_seconds) : "none";
  kv["seed"] = std::to_string(seed);
  kv["topk_average"] = std::to_string(topk_average);
  kv["train_manifest"] = RelativeTo(train_manifest, relative_to);
  kv["val_manifest"] = RelativeTo(val_manifest, relative_to);
  kv["out_dir"] = RelativeTo(out_dir, relative_to);
  kv["jobs"] = std::to_string(jobs);
  kv["stem_channels"] = std::to_string(model.stem_channels);
  std::string blocks;
  for (std::size_t i = 0; i < model.block_channels.size(); ++i) {
    if (i) blocks += ",";
    blocks += std::to_string(model.block_channels[i]);
  }
  kv["block_channels"] = blocks;
  return kv;
}

AdamState MakeAdamState(const ModelParams& params) {
  AdamState state;
  for (const Tensor<float>* t : TrainableTensors(params)) {
    state.first_moment.emplace_back(t->shape);
    state.second_moment.emplace_back(t->shape);
  }
  return state;
}

void AdamStep(ModelParams& params, const GradientSet& grads, AdamState& state,
              double lr) {
  std::vector<Tensor<float>*> tensors = TrainableTensors(params);
  if (grads.tensors.size() != tensors.size() ||
      state.first_moment.size() != tensors.size() ||
      state.second_moment.size() != tensors.size()) {
    throw DomainError("gradient set does not match the model");
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (grads.tensors[i].shape != tensors[i]->shape) {
      throw DomainError("gradient shape mismatch at tensor " + std::to_string(i));
    }
    for (float g : grads.tensors[i].data) {
      if (!std::isfinite(g)) {
        throw TrainingError("non-finite gradient at step " +
                            std::to_string(state.step + 1));
      }
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    float* p = tensors[i]->data.data();
    const float* g = grads.tensors[i].data.data();
    float* m = state.first_moment[i].data.data();
    float* v = state.second_moment[i].data.data();
    for (std::size_t k = 0; k < tensors[i]->size(); ++k) {
      const double mk = kAdamBeta1 * m[k] + (1.0 - kAdamBeta1) * g[k];
      const double vk = kAdamBeta2 * v[k] + (1.0 - kAdamBeta2) * double(g[k]) * g[k];
      m[k] = static_cast<float>(mk);
      v[k] = static_cast<float>(vk);
      const double update = lr * (mk / c1) / (std::sqrt(vk / c2) + kAdamEpsilon);
      p[k] = static_cast<float>(p[k] - update);
    }
  }
}

int64_t DrawCropStart(Rng& rng, int64_t clip_len, int64_t crop_len) {
  if (crop_len < 0 || crop_len > clip_len) {
    throw DomainError("crop of " + std::to_string(crop_len) +
                      " samples is longer than the clip (" +
                      std::to_string(clip_len) + ")");
  }
  return static_cast<int64_t>(rng.UniformInt(static_cast<uint64_t>(clip_len - crop_len)));
}

AudioClip RandomCrop(const AudioClip& clip, double crop_seconds, Rng& rng) {
  const int64_t crop_len = std::llround(crop_seconds * clip.sample_rate);
  if (crop_len <= 0) throw DomainError("crop length must be positive");
  const int64_t start =
      DrawCropStart(rng, static_cast<int64_t>(clip.size()), crop_len);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(clip.samples.begin() + start,
                     clip.samples.begin() + start + crop_len);
  return out;
}

void CheckpointLedger::Add(LedgerEntry entry) {
  const auto pos = std::upper_bound(
      entries_.begin(), entries_.end(), entry,
      [](const LedgerEntry& a, const LedgerEntry& b) {
        if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
        return a.epoch < b.epoch;
      });
  entries_.insert(pos, std::move(entry));
}

std::vector<LedgerEntry> CheckpointLedger::Top(std::size_t k) const {
  return {entries_.begin(), entries_.begin() + std::min(k, entries_.size())};
}

std::string CheckpointLedger::ToCsv() const {
  std::ostringstream out;
  out << "rank,epoch,val_accuracy,checkpoint\n";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    out << i << "," << entries_[i].epoch << "," << FormatDouble(entries_[i].val_accuracy)
        << "," << entries_[i].checkpoint.filename().generic_string() << "\n";
  }
  return out.str();
}

ModelParams AverageParams(std::span<const ModelParams> models) {
  if (models.empty()) throw DomainError("nothing to average");
  for (const auto& m : models) {
    if (!(m.config == models[0].config)) {
      throw FormatError("cannot average checkpoints of different shapes");
    }
  }
  std::vector<std::vector<const Tensor<float>*>> per_model;
  for (const auto& m : models) {
    std::vector<const Tensor<float>*> ts;
    ForEachTensor<float>(m, [&](const TensorInfo&, const Tensor<float>& t) { ts.push_back(&t); });
    per_model.push_back(std::move(ts));
  }
  ModelParams out = MakeParams<float>(models[0].config);
  const double n = static_cast<double>(models.size());
  std::size_t idx = 0;
  ForEachTensor<float>(out, [&](const TensorInfo&, Tensor<float>& t) {
    for (std::size_t k = 0; k < t.size(); ++k) {
      double sum = 0.0;
      for (const auto& ts : per_model) sum += ts[idx]->data[k];
      t.data[k] = static_cast<float>(sum / n);
    }
    ++idx;
  });
  return out;
}

ModelParams AverageCheckpoints(const CheckpointLedger& ledger, std::size_t k) {
  const auto top = ledger.Top(k);
  if (top.empty()) throw DomainError("ledger is empty");
  std::vector<ModelParams> models;
  for (const auto& e : top) models.push_back(LoadCheckpointFile(e.checkpoint));
  return AverageParams(models);
}

std::string MetricsToCsv(std::span<const EpochMetrics> log, bool with_wall_clock) {
  std::ostringstream out;
  out << "epoch,train_loss,val_accuracy,wall_seconds\n";
  for (const auto& m : log) {
    out << m.epoch << "," << FormatDouble(m.train_loss) << ","
        << FormatDouble(m.val_accuracy) << ","
        << (with_wall_clock ? FormatDouble(m.wall_seconds) : std::string("0")) << "\n";
  }
  return out.str();
}

TrainResult RunTraining(const TrainConfig& config) {
  config.Validate();
  const DatasetManifest train_set = ReadManifest(config.train_manifest);
  const DatasetManifest val_set = ReadManifest(config.val_manifest);
  if (train_set.records.empty()) throw ValidationError("training manifest is empty");
  if (val_set.records.empty()) throw ValidationError("validation manifest is empty");

  fs::create_directories(config.out_dir / "checkpoints");
  WriteText(config.out_dir / "train.cfg", FormatKeyValues(config.ToKeyValues(config.out_dir)));

  const auto start_time = std::chrono::steady_clock::now();
  const std::vector<AudioClip> train_clips = LoadClips(train_set, config.jobs);
  const std::vector<AudioClip> val_clips = LoadClips(val_set, config.jobs);
  const std::vector<LogMelSpectrogram> val_features = Featurize(val_clips, config.jobs);
  std::vector<LogMelSpectrogram> train_features;
  if (!config.crop_seconds) train_features = Featurize(train_clips, config.jobs);

  std::vector<int> train_labels, val_labels;
  for (const auto& r : train_set.records) train_labels.push_back(r.label);
  for (const auto& r : val_set.records) val_labels.push_back(r.label);

  Rng root(config.seed);
  Rng init_rng = root.Split(kInitStream);
  ModelParams params = InitModel(init_rng, config.model);
  AdamState adam = MakeAdamState(params);
  std::cerr << "model: " << ParamCount(params) << " trainable parameters, "
            << train_clips.size() << " train / " << val_clips.size()
            << " validation clips\n";

  TrainResult result;
  std::vector<std::size_t> order(train_clips.size());
  const std::size_t n = order.size();
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle = root.Split(kShuffleStream).Split(static_cast<uint64_t>(epoch));
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.UniformInt(i - 1)]);
    }

    double loss_sum = 0.0;
    int step = 0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size, ++step) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      std::vector<LogMelSpectrogram> cropped;
      std::vector<BatchItem> items(end - begin);
      if (config.crop_seconds) {
        cropped.resize(end - begin);
        ParallelFor(cropped.size(), config.jobs, [&](std::size_t k) {
          const std::size_t rec = order[begin + k];
          Rng rng = root.Split(kCropStream).Split(static_cast<uint64_t>(epoch)).Split(rec);
          try {
            cropped[k] = LogMel(RandomCrop(train_clips[rec], *config.crop_seconds, rng));
          } catch (const Error& e) {
            throw ValidationError("record " + std::to_string(rec) + ": " + e.what());
          }
        });
      }
      std::vector<int> labels(end - begin);
      for (std::size_t k = 0; k < items.size(); ++k) {
        const std::size_t rec = order[begin + k];
        items[k] = {config.crop_seconds ? &cropped[k] : &train_features[rec],
                    train_labels[rec]};
        labels[k] = train_labels[rec];
      }
      const Batch batch = PadBatch(items);
      BackwardResult<float> br = Backward(params, batch, labels);
      if (!std::isfinite(br.loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) +
                            ", step " + std::to_string(step));
      }
      loss_sum += double(br.loss) * static_cast<double>(items.size());
      UpdateRunningStats(params, br.stats);
      try {
        AdamStep(params, br.grads, adam, config.lr);
      } catch (const TrainingError& e) {
        throw TrainingError("epoch " + std::to_string(epoch) + ": " + e.what());
      }
    }

    const auto scores = ScoreSpectrograms(params, val_features, config.batch_size, config.jobs);
    std::vector<int> preds;
    for (const auto& row : scores) preds.push_back(Argmax(row));
    const double val_acc = Accuracy(preds, val_labels);

    std::ostringstream name;
    name << "epoch_" << std::setw(3) << std::setfill('0') << epoch << ".wkws";
    const fs::path ckpt = config.out_dir / "checkpoints" / name.str();
    SaveCheckpointFile(params, ckpt);
    result.ledger.Add({epoch, val_acc, ckpt});

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(n);
    m.val_accuracy = val_acc;
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                   start_time).count();
    result.log.push_back(m);
    WriteText(config.out_dir / "metrics.csv", MetricsToCsv(result.log));
    std::cerr << "epoch " << epoch << " train_loss " << m.train_loss
              << " val_accuracy " << val_acc << "\n";
  }

  result.averaged =
      AverageCheckpoints(result.ledger, static_cast<std::size_t>(config.topk_average));
  SaveCheckpointFile(result.averaged, config.out_dir / "avg.wkws");
  WriteText(config.out_dir / "ledger.csv", result.ledger.ToCsv());
  return result;
}

}  // namespace wkws
