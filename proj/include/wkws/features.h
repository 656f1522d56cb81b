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

#ifndef WKWS_FEATURES_H_
#define WKWS_FEATURES_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "wkws/audio.h"

namespace wkws {

inline constexpr int kFeatureSampleRate = 16000;
inline constexpr int kNumMels = 64;
inline constexpr int kFftSize = 512;
inline constexpr int kWindowSamples = 512;  // 32 ms
inline constexpr int kHopSamples = 160;     // 10 ms
inline constexpr double kEnergyFloor = 1e-10;

// Row-major frames x bins natural-log mel energies.
struct LogMelSpectrogram {
  int frames = 0;
  int bins = kNumMels;
  std::vector<double> data;

  double at(int t, int m) const { return data[std::size_t(t) * bins + m]; }
  std::span<const double> row(int t) const {
    return {data.data() + std::size_t(t) * bins, std::size_t(bins)};
  }
};

// B x T_max x bins, zero beyond each item's true length.
struct Batch {
  int batch_size = 0;
  int max_frames = 0;
  int bins = kNumMels;
  std::vector<float> data;
  std::vector<int> lengths;
  std::vector<int> labels;

  float at(int b, int t, int m) const {
    return data[(std::size_t(b) * max_frames + t) * bins + m];
  }
};

double HzToMel(double hz);
double MelToHz(double mel);

// Centers (Hz) of the n_mels triangles, equally spaced in mel on
// [0, sample_rate/2].
std::vector<double> MelCenterFrequencies(int n_mels, int sample_rate);

// n_mels x (n_fft/2 + 1), row-major, unnormalized HTK triangles.
std::vector<double> MelFilterbank(int n_mels, int sample_rate, int n_fft);

// Frame count for a clip of num_samples (>= one window).
int NumFrames(std::size_t num_samples);

// Periodic Hann, 512-point power spectrum, 64 mel filters, ln(max(e, 1e-10)).
// Frames start at sample 0; no padding. Requires a 16 kHz clip.
LogMelSpectrogram LogMel(const AudioClip& clip);

// LoadWav followed by resampling to 16 kHz.
AudioClip LoadClipForFeatures(const std::filesystem::path& path);

struct BatchItem {
  const LogMelSpectrogram* features;
  int label;
};

Batch PadBatch(std::span<const BatchItem> items);

}  // namespace wkws

#endif  // WKWS_FEATURES_H_
