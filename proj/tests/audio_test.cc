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

#include "wkws/audio.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "wkws/error.h"
#include "wkws/rng.h"

namespace wkws {
namespace {

namespace fs = std::filesystem;

class AudioTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("wkws_audio_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

AudioClip Sine(double hz, double seconds, int rate, double amp = 0.5) {
  AudioClip c;
  c.sample_rate = rate;
  c.samples.resize(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (std::size_t i = 0; i < c.size(); ++i) {
    c.samples[i] = static_cast<float>(amp * std::sin(2 * std::numbers::pi * hz * i / rate));
  }
  return c;
}

// Hand-built WAV image for decoder tests.
std::vector<unsigned char> WavImage(uint16_t format, uint16_t channels, uint32_t rate,
                                    uint16_t bits, const std::vector<unsigned char>& data,
                                    uint32_t declared_data_size) {
  std::vector<unsigned char> out;
  auto u16 = [&](uint16_t v) { out.push_back(v & 0xFF); out.push_back(v >> 8); };
  auto u32 = [&](uint32_t v) { for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF); };
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  tag("RIFF");
  u32(36 + declared_data_size);
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(channels * bits / 8);
  u16(bits);
  tag("data");
  u32(declared_data_size);
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

TEST_F(AudioTest, OneSecondPcm16) {
  AudioClip c;
  c.sample_rate = 16000;
  c.samples.assign(16000, 0.25f);
  SaveWav(c, dir_ / "a.wav");
  const AudioClip back = LoadWav(dir_ / "a.wav");
  EXPECT_EQ(back.size(), 16000u);
  EXPECT_EQ(back.sample_rate, 16000);
  EXPECT_DOUBLE_EQ(back.seconds(), 1.0);
}

TEST_F(AudioTest, StereoIsAveraged) {
  // Frames (a, b) = (1000, -3000) and (8000, 2000).
  std::vector<unsigned char> data;
  for (int16_t v : {int16_t(1000), int16_t(-3000), int16_t(8000), int16_t(2000)}) {
    data.push_back(static_cast<uint16_t>(v) & 0xFF);
    data.push_back(static_cast<uint16_t>(v) >> 8);
  }
  const AudioClip c = DecodeWav(WavImage(1, 2, 8000, 16, data, 8));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_FLOAT_EQ(c.samples[0], (1000.0f - 3000.0f) / 2 / 32768.0f);
  EXPECT_FLOAT_EQ(c.samples[1], (8000.0f + 2000.0f) / 2 / 32768.0f);
  EXPECT_EQ(c.sample_rate, 8000);
}

TEST_F(AudioTest, Float32IsDecoded) {
  std::vector<unsigned char> data(8);
  const float a = 0.75f, b = -1.5f;
  std::memcpy(data.data(), &a, 4);
  std::memcpy(data.data() + 4, &b, 4);
  const AudioClip c = DecodeWav(WavImage(3, 1, 16000, 32, data, 8));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.samples[0], 0.75f);
  // Out-of-range values survive loading.
  EXPECT_EQ(c.samples[1], -1.5f);
}

TEST_F(AudioTest, TruncatedDataIsDecodeError) {
  const std::vector<unsigned char> data(10, 0);
  EXPECT_THROW(DecodeWav(WavImage(1, 1, 16000, 16, data, 100)), DecodeError);
  EXPECT_THROW(DecodeWav({'R', 'I', 'F', 'F'}), DecodeError);
}

TEST_F(AudioTest, UnsupportedEncoding) {
  const std::vector<unsigned char> data(6, 0);
  EXPECT_THROW(DecodeWav(WavImage(1, 1, 16000, 24, data, 6)), UnsupportedFormatError);
  EXPECT_THROW(DecodeWav(WavImage(6, 1, 8000, 8, data, 6)), UnsupportedFormatError);
}

TEST_F(AudioTest, MissingFileIsIoError) {
  EXPECT_THROW(LoadWav(dir_ / "nope.wav"), IoError);
}

TEST_F(AudioTest, ZerosRoundTripToZeroFrames) {
  AudioClip c;
  c.samples.assign(100, 0.0f);
  const auto bytes = EncodeWav(c);
  ASSERT_EQ(bytes.size(), 44u + 200u);
  for (std::size_t i = 44; i < bytes.size(); ++i) EXPECT_EQ(bytes[i], 0);
}

TEST_F(AudioTest, FullScaleSaturates) {
  AudioClip c;
  c.samples = {1.0f, -1.0f, 1.7f, -2.0f};
  const AudioClip back = DecodeWav(EncodeWav(c));
  EXPECT_EQ(back.samples[0], 32767.0f / 32768.0f);
  EXPECT_EQ(back.samples[1], -1.0f);
  EXPECT_EQ(back.samples[2], 32767.0f / 32768.0f);
  EXPECT_EQ(back.samples[3], -1.0f);
}

TEST_F(AudioTest, EmptyClipCannotBeSaved) {
  EXPECT_THROW(EncodeWav(AudioClip{}), DomainError);
  EXPECT_THROW(SaveWav(Sine(100, 0.1, 16000), dir_ / "missing_dir" / "x.wav"), IoError);
}

TEST_F(AudioTest, RoundTripWithinOneLsbProperty) {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    AudioClip c;
    c.sample_rate = 8000 + static_cast<int>(rng.UniformInt(40000));
    c.samples.resize(1 + rng.UniformInt(2000));
    for (float& s : c.samples) s = static_cast<float>(rng.Uniform(-1.0, 1.0));
    c.samples[0] = 1.0f;
    const AudioClip back = DecodeWav(EncodeWav(c));
    ASSERT_EQ(back.size(), c.size());
    EXPECT_EQ(back.sample_rate, c.sample_rate);
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_LE(std::abs(back.samples[i] - c.samples[i]), 1.0 / 32768.0);
    }
  }
}

TEST_F(AudioTest, ResampleIdentityIsBitwise) {
  const AudioClip c = Sine(440, 0.3, 16000);
  const AudioClip r = Resample(c, 16000);
  EXPECT_EQ(r.samples, c.samples);
  EXPECT_EQ(r.sample_rate, 16000);
}

TEST_F(AudioTest, ResampleLength) {
  EXPECT_EQ(Resample(Sine(100, 1.0, 8000), 16000).size(), 16000u);
  EXPECT_EQ(Resample(Sine(100, 1.0, 44100), 16000).size(), 16000u);
  AudioClip odd;
  odd.sample_rate = 48000;
  odd.samples.assign(1001, 0.1f);
  EXPECT_EQ(Resample(odd, 16000).size(), static_cast<std::size_t>(std::lround(1001 / 3.0)));
  EXPECT_THROW(Resample(odd, 0), DomainError);
}

double Correlation(const std::vector<float>& a, const std::vector<float>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += double(a[i]) * b[i];
    aa += double(a[i]) * a[i];
    bb += double(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

TEST_F(AudioTest, DownsampledSineMatchesAnalyticSine) {
  const AudioClip out = Resample(Sine(100, 1.0, 48000), 16000);
  const AudioClip ideal = Sine(100, 1.0, 16000);
  ASSERT_EQ(out.size(), ideal.size());
  EXPECT_GT(Correlation(out.samples, ideal.samples), 0.999);
}

TEST_F(AudioTest, UpsampledSineMatchesAnalyticSine) {
  const AudioClip out = Resample(Sine(1000, 1.0, 8000), 16000);
  const AudioClip ideal = Sine(1000, 1.0, 16000);
  EXPECT_GT(Correlation(out.samples, ideal.samples), 0.999);
}

TEST_F(AudioTest, DownsamplingRejectsAboveNyquist) {
  // 7 kHz cannot be represented at 8 kHz output; it must be filtered out.
  const AudioClip out = Resample(Sine(7000, 1.0, 48000), 8000);
  double interior = 0;
  for (std::size_t i = 100; i < out.size() - 100; ++i) interior += out.samples[i] * out.samples[i];
  interior /= static_cast<double>(out.size() - 200);
  EXPECT_LT(interior, 0.125 * 1e-4);  // >40 dB below the 0.125 input power
}

TEST_F(AudioTest, RmsPowerExamples) {
  AudioClip z;
  z.samples.assign(10, 0.0f);
  EXPECT_EQ(RmsPower(z), 0.0);
  AudioClip h;
  h.samples.assign(10, 0.5f);
  EXPECT_DOUBLE_EQ(RmsPower(h), 0.25);
  AudioClip sq;
  for (int i = 0; i < 100; ++i) sq.samples.push_back(i % 2 ? 1.0f : -1.0f);
  EXPECT_DOUBLE_EQ(RmsPower(sq), 1.0);
  EXPECT_THROW(RmsPower(AudioClip{}), DomainError);
}

TEST_F(AudioTest, RmsPowerScalesQuadratically) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    AudioClip c;
    c.samples.resize(1 + rng.UniformInt(500));
    for (float& s : c.samples) s = static_cast<float>(rng.Uniform(-0.5, 0.5));
    const double k = rng.Uniform(0.1, 2.0);
    // Scale in double so the check sees only the power computation.
    double scaled = 0;
    for (float s : c.samples) scaled += (k * s) * (k * s);
    scaled /= static_cast<double>(c.size());
    EXPECT_NEAR(scaled, k * k * RmsPower(c), 1e-12 * scaled);
  }
}

}  // namespace
}  // namespace wkws
