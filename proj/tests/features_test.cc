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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "wkws/error.h"
#include "wkws/rng.h"

namespace wkws {
namespace {

AudioClip Tone(double hz, std::size_t n, double amp = 0.5) {
  AudioClip c;
  c.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.samples[i] = static_cast<float>(amp * std::sin(2 * std::numbers::pi * hz * i / 16000.0));
  }
  return c;
}

AudioClip Noise(uint64_t seed, std::size_t n, double amp) {
  Rng rng(seed);
  AudioClip c;
  c.samples.resize(n);
  for (float& s : c.samples) s = static_cast<float>(rng.Uniform(-amp, amp));
  return c;
}

// One log-mel frame from first principles: direct DFT of the Hann-windowed
// frame and triangles written out from the mel-scale definition.
std::vector<double> OracleFrame(const AudioClip& clip, int frame) {
  const int n = 512;
  std::vector<double> power(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0;
    for (int i = 0; i < n; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / n);
      acc += w * clip.samples[frame * 160 + i] *
             std::polar(1.0, -2 * std::numbers::pi * k * i / n);
    }
    power[k] = std::norm(acc);
  }
  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  std::vector<double> out(64);
  for (int m = 0; m < 64; ++m) {
    const double lo = hz(mel(8000.0) * m / 65), mid = hz(mel(8000.0) * (m + 1) / 65),
                 hi = hz(mel(8000.0) * (m + 2) / 65);
    double e = 0;
    for (int k = 0; k <= n / 2; ++k) {
      const double f = k * 16000.0 / n;
      double w = 0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      e += w * power[k];
    }
    out[m] = std::log(std::max(e, 1e-10));
  }
  return out;
}

TEST(FeaturesTest, MelScale) {
  EXPECT_NEAR(HzToMel(700.0), 781.0, 0.5);
  EXPECT_EQ(HzToMel(0.0), 0.0);
  for (double f : {10.0, 440.0, 1000.0, 7999.0}) EXPECT_NEAR(MelToHz(HzToMel(f)), f, 1e-9);
}

TEST(FeaturesTest, OneSecondHas97Frames) {
  EXPECT_EQ(NumFrames(16000), 97);
  const LogMelSpectrogram s = LogMel(Tone(440, 16000));
  EXPECT_EQ(s.frames, 97);
  EXPECT_EQ(s.bins, 64);
  EXPECT_EQ(s.data.size(), 97u * 64u);
}

TEST(FeaturesTest, FrameCountProperty) {
  for (std::size_t n : {512u, 671u, 672u, 833u, 16000u, 48000u, 16159u}) {
    EXPECT_EQ(NumFrames(n), 1 + static_cast<int>((n - 512) / 160)) << n;
    EXPECT_EQ(LogMel(Tone(300, n)).frames, NumFrames(n));
  }
  EXPECT_THROW(NumFrames(511), DomainError);
  EXPECT_THROW(LogMel(Tone(300, 100)), DomainError);
}

TEST(FeaturesTest, RequiresSixteenKilohertz) {
  AudioClip c = Tone(300, 16000);
  c.sample_rate = 8000;
  EXPECT_THROW(LogMel(c), DomainError);
}

TEST(FeaturesTest, SilenceHitsTheFloor) {
  AudioClip c;
  c.samples.assign(16000, 0.0f);
  for (double v : LogMel(c).data) EXPECT_DOUBLE_EQ(v, std::log(1e-10));
}

TEST(FeaturesTest, MatchesDirectComputation) {
  const AudioClip c = Noise(3, 4000, 0.3);
  const LogMelSpectrogram s = LogMel(c);
  for (int frame : {0, 7, s.frames - 1}) {
    const auto want = OracleFrame(c, frame);
    for (int m = 0; m < 64; ++m) EXPECT_NEAR(s.at(frame, m), want[m], 1e-9) << frame << "," << m;
  }
}

TEST(FeaturesTest, ToneLandsInNearestBand) {
  const auto centers = MelCenterFrequencies(64, 16000);
  ASSERT_EQ(centers.size(), 64u);
  for (double hz : {250.0, 1000.0, 3000.0}) {
    const LogMelSpectrogram s = LogMel(Tone(hz, 16000));
    std::vector<double> mean(64, 0.0);
    for (int t = 0; t < s.frames; ++t) {
      for (int m = 0; m < 64; ++m) mean[m] += s.at(t, m);
    }
    const auto argmax = std::max_element(mean.begin(), mean.end()) - mean.begin();
    const auto nearest = std::min_element(centers.begin(), centers.end(),
                                          [&](double a, double b) {
                                            return std::abs(a - hz) < std::abs(b - hz);
                                          }) - centers.begin();
    EXPECT_EQ(argmax, nearest) << hz;
  }
}

TEST(FeaturesTest, FilterbankShape) {
  const auto fb = MelFilterbank(64, 16000, 512);
  ASSERT_EQ(fb.size(), 64u * 257u);
  int prev_peak = -1;
  for (int m = 0; m < 64; ++m) {
    const auto row = fb.begin() + m * 257;
    const auto peak = static_cast<int>(std::max_element(row, row + 257) - row);
    EXPECT_GT(peak, prev_peak) << m;
    prev_peak = peak;
    for (int k = 0; k < 257; ++k) {
      EXPECT_GE(row[k], 0.0);
      EXPECT_LE(row[k], 1.0);
    }
  }
  // Every bin strictly inside (0, 8000) Hz is covered by some triangle.
  for (int k = 1; k < 256; ++k) {
    double sum = 0;
    for (int m = 0; m < 64; ++m) sum += fb[m * 257 + k];
    EXPECT_GT(sum, 0.0) << k;
  }
}

TEST(FeaturesTest, AmplitudeScalingShiftsLogEnergy) {
  const AudioClip base = Noise(4, 8000, 0.2);
  for (float k : {0.5f, 2.0f, 4.0f}) {
    AudioClip scaled = base;
    for (float& s : scaled.samples) s *= k;
    const LogMelSpectrogram a = LogMel(base), b = LogMel(scaled);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      EXPECT_NEAR(b.data[i] - a.data[i], 2 * std::log(k), 1e-6);
    }
  }
}

TEST(FeaturesTest, PadBatch) {
  const LogMelSpectrogram a = LogMel(Noise(5, 16000, 0.1));
  const LogMelSpectrogram b = LogMel(Noise(6, 8000, 0.1));
  const std::vector<BatchItem> items = {{&a, 3}, {&b, 10}};
  const Batch batch = PadBatch(items);
  EXPECT_EQ(batch.batch_size, 2);
  EXPECT_EQ(batch.max_frames, a.frames);
  EXPECT_EQ(batch.lengths, (std::vector<int>{a.frames, b.frames}));
  EXPECT_EQ(batch.labels, (std::vector<int>{3, 10}));
  for (int t = 0; t < a.frames; ++t) {
    for (int m = 0; m < 64; ++m) {
      EXPECT_EQ(batch.at(0, t, m), static_cast<float>(a.at(t, m)));
      EXPECT_EQ(batch.at(1, t, m), t < b.frames ? static_cast<float>(b.at(t, m)) : 0.0f);
    }
  }
  EXPECT_THROW(PadBatch({}), DomainError);
  LogMelSpectrogram odd = b;
  odd.bins = 32;
  const std::vector<BatchItem> bad = {{&a, 0}, {&odd, 0}};
  EXPECT_THROW(PadBatch(bad), DomainError);
}

}  // namespace
}  // namespace wkws
