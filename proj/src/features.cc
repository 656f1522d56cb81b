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

#include "wkws/features.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "fft.h"
#include "wkws/error.h"

namespace wkws {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

namespace {

std::vector<double> MelEdges(int n_mels, int sample_rate) {
  const double top = HzToMel(sample_rate / 2.0);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = MelToHz(top * i / (n_mels + 1));
  }
  return edges;
}

const std::vector<double>& DefaultFilterbank() {
  static const std::vector<double> fb =
      MelFilterbank(kNumMels, kFeatureSampleRate, kFftSize);
  return fb;
}

const std::vector<double>& HannWindow() {
  static const std::vector<double> w = [] {
    std::vector<double> v(kWindowSamples);
    for (int i = 0; i < kWindowSamples; ++i) {
      v[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / kWindowSamples);
    }
    return v;
  }();
  return w;
}

}  // namespace

std::vector<double> MelCenterFrequencies(int n_mels, int sample_rate) {
  std::vector<double> edges = MelEdges(n_mels, sample_rate);
  return {edges.begin() + 1, edges.end() - 1};
}

std::vector<double> MelFilterbank(int n_mels, int sample_rate, int n_fft) {
  if (n_mels < 1) throw DomainError("n_mels must be >= 1");
  if (n_fft < 2 || sample_rate <= 0) throw DomainError("bad FFT size or rate");
  const int n_bins = n_fft / 2 + 1;
  const std::vector<double> edges = MelEdges(n_mels, sample_rate);
  std::vector<double> fb(std::size_t(n_mels) * n_bins, 0.0);
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      double w = 0.0;
      if (f > lo && f <= mid) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      fb[std::size_t(m) * n_bins + k] = w;
    }
  }
  return fb;
}

int NumFrames(std::size_t num_samples) {
  if (num_samples < static_cast<std::size_t>(kWindowSamples)) {
    throw DomainError("clip of " + std::to_string(num_samples) +
                      " samples is shorter than one analysis window");
  }
  return 1 + static_cast<int>((num_samples - kWindowSamples) / kHopSamples);
}

LogMelSpectrogram LogMel(const AudioClip& clip) {
  if (clip.sample_rate != kFeatureSampleRate) {
    throw DomainError("log-mel expects 16 kHz audio, got " +
                      std::to_string(clip.sample_rate) + " Hz");
  }
  const int frames = NumFrames(clip.size());
  constexpr int kBins = kFftSize / 2 + 1;
  const std::vector<double>& fb = DefaultFilterbank();
  const std::vector<double>& window = HannWindow();

  thread_local internal::RealFft fft(kFftSize);
  std::vector<double> buf(kFftSize);
  std::vector<std::complex<double>> spec(kBins);
  std::vector<double> power(kBins);

  LogMelSpectrogram out;
  out.frames = frames;
  out.bins = kNumMels;
  out.data.resize(std::size_t(frames) * kNumMels);
  for (int t = 0; t < frames; ++t) {
    const float* x = clip.samples.data() + std::size_t(t) * kHopSamples;
    for (int i = 0; i < kWindowSamples; ++i) buf[i] = x[i] * window[i];
    fft.Forward(buf, spec);
    for (int k = 0; k < kBins; ++k) power[k] = std::norm(spec[k]);
    double* row = out.data.data() + std::size_t(t) * kNumMels;
    for (int m = 0; m < kNumMels; ++m) {
      const double* w = fb.data() + std::size_t(m) * kBins;
      double e = 0.0;
      for (int k = 0; k < kBins; ++k) e += w[k] * power[k];
      row[m] = std::log(std::max(e, kEnergyFloor));
    }
  }
  return out;
}

AudioClip LoadClipForFeatures(const std::filesystem::path& path) {
  return Resample(LoadWav(path), kFeatureSampleRate);
}

Batch PadBatch(std::span<const BatchItem> items) {
  if (items.empty()) throw DomainError("cannot pad an empty batch");
  Batch batch;
  batch.batch_size = static_cast<int>(items.size());
  batch.bins = items[0].features->bins;
  for (const auto& item : items) {
    if (item.features->bins != batch.bins) {
      throw DomainError("batch items disagree on feature bins");
    }
    batch.max_frames = std::max(batch.max_frames, item.features->frames);
  }
  batch.data.assign(std::size_t(batch.batch_size) * batch.max_frames * batch.bins,
                    0.0f);
  for (std::size_t b = 0; b < items.size(); ++b) {
    const LogMelSpectrogram& f = *items[b].features;
    float* dst = batch.data.data() + b * batch.max_frames * batch.bins;
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      dst[i] = static_cast<float>(f.data[i]);
    }
    batch.lengths.push_back(f.frames);
    batch.labels.push_back(items[b].label);
  }
  return batch;
}

}  // namespace wkws
