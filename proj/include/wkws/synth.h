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

#ifndef WKWS_SYNTH_H_
#define WKWS_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wkws/audio.h"
#include "wkws/rng.h"

namespace wkws {

inline constexpr int kNumClasses = 11;
inline constexpr int kUnknownLabel = 10;

enum class Variant { kClean, kWeak, kWeakSnr, kWeakPos };
enum class Split { kTrain, kValidation, kTest };
enum class NoiseKind { kWhite, kPink };

std::string_view ToString(Variant v);
std::string_view ToString(Split s);
std::string_view ToString(NoiseKind k);
Variant ParseVariant(std::string_view s);
Split ParseSplit(std::string_view s);
NoiseKind ParseNoiseKind(std::string_view s);

struct SynthConfig {
  Variant variant = Variant::kClean;
  double target_seconds = 3.0;
  std::optional<double> snr_db;
  int sample_rate = 16000;
  uint64_t seed = 0;
  std::filesystem::path keyword_dir;
  std::filesystem::path noise_dir;
  std::filesystem::path out_dir;
  // Abort on the first bad record instead of skipping it.
  bool strict = true;
  // Worker threads for record synthesis; output does not depend on it.
  int jobs = 1;

  // Throws DomainError when snr_db presence does not match the variant or
  // the duration / rate are not positive.
  void Validate() const;
  int64_t target_samples() const;
};

struct SampleRecord {
  std::filesystem::path out_path;
  int label = 0;
  Split split = Split::kTrain;
  std::filesystem::path source_keyword;
  std::optional<std::filesystem::path> source_noise;
  int64_t offset_samples = 0;
  std::optional<double> snr_db;
  uint64_t seed = 0;
  // Where the t-second noise window starts inside the source noise clip,
  // and the gain applied to it (weak_snr only). Enough to re-derive the
  // realized SNR from the sources.
  std::optional<int64_t> noise_start_samples;
  std::optional<double> noise_gain;
};

struct DatasetManifest {
  std::vector<SampleRecord> records;
  SynthConfig config;
};

struct KeywordEntry {
  std::filesystem::path path;
  int label = 0;
  Split split = Split::kTrain;
};

// yes..go -> 0..9, any other non-empty name -> 10.
int MapLabel(std::string_view keyword_name);

// Uniform integer offset on [0, t_samples - keyword_samples].
int64_t SampleOffset(Rng& rng, int64_t t_samples, int64_t keyword_samples);

// Noise everywhere except [offset, offset + keyword.size()), which holds
// the keyword verbatim. Noise is read cyclically starting at noise_start.
AudioClip SpliceNoOverlap(const AudioClip& keyword, const AudioClip& noise,
                          int64_t offset, int64_t t_samples,
                          int64_t noise_start = 0);

struct MixResult {
  AudioClip clip;
  // Gain applied to the noise before summation.
  double noise_gain = 1.0;
  // Common factor applied to the whole sum to stay within full scale.
  double peak_scale = 1.0;
};

// Keyword added on top of t_samples of noise. The noise gain is chosen so
// that keyword power over noise power, both measured over the interval the
// keyword occupies, equals snr_db.
MixResult MixSnr(const AudioClip& keyword, const AudioClip& noise,
                 int64_t offset, int64_t t_samples, double snr_db,
                 int64_t noise_start = 0);

// The gain MixSnr would use; exposed for tests and re-measurement.
double SnrNoiseGain(double keyword_power, double noise_power, double snr_db);

// Deterministic white or pink (-3 dB/octave) noise with RMS amplitude 0.1.
AudioClip GenNoise(NoiseKind kind, double seconds, int sample_rate,
                   uint64_t seed);

// GSCV1 layout: one folder per word; validation_list.txt and
// testing_list.txt name the held-out files, the rest is train. Folders
// starting with '_' are skipped. Sorted by relative path.
std::vector<KeywordEntry> ScanKeywordCorpus(const std::filesystem::path& dir);

// All *.wav below dir, sorted.
std::vector<std::filesystem::path> ScanNoiseCorpus(
    const std::filesystem::path& dir);

// Synthesizes every record into config.out_dir/audio and writes
// manifest.jsonl plus one <split>.jsonl per split. Train and validation
// records follow the variant; test records are always clean.
DatasetManifest BuildDataset(const SynthConfig& config,
                             const std::vector<KeywordEntry>& keywords,
                             const std::vector<std::filesystem::path>& noise);

}  // namespace wkws

#endif  // WKWS_SYNTH_H_
