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

#include "wkws/synth.h"

#include <gtest/gtest.h>
#include <unistd.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "testing/oracles.h"
#include "wkws/error.h"
#include "wkws/manifest.h"
#include "wkws/micro_corpus.h"

namespace wkws {
namespace {

namespace fs = std::filesystem;

AudioClip Constant(std::size_t n, float v, int rate = 16000) {
  AudioClip c;
  c.sample_rate = rate;
  c.samples.assign(n, v);
  return c;
}

AudioClip RandomClip(Rng& rng, std::size_t n, double amp) {
  AudioClip c;
  c.samples.resize(n);
  for (float& s : c.samples) s = static_cast<float>(rng.Uniform(-amp, amp));
  return c;
}

std::string ReadBytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(SynthTest, MapLabel) {
  EXPECT_EQ(MapLabel("yes"), 0);
  EXPECT_EQ(MapLabel("no"), 1);
  EXPECT_EQ(MapLabel("go"), 9);
  EXPECT_EQ(MapLabel("bed"), 10);
  EXPECT_EQ(MapLabel("Yes"), 10);
  EXPECT_THROW(MapLabel(""), DomainError);
}

TEST(SynthTest, EnumRoundTrip) {
  for (Variant v : {Variant::kClean, Variant::kWeak, Variant::kWeakSnr, Variant::kWeakPos}) {
    EXPECT_EQ(ParseVariant(ToString(v)), v);
  }
  EXPECT_EQ(ParseSplit("validation"), Split::kValidation);
  EXPECT_EQ(ParseNoiseKind("pink"), NoiseKind::kPink);
  EXPECT_THROW(ParseVariant("strong"), DomainError);
}

TEST(SynthTest, ConfigValidation) {
  SynthConfig c;
  c.variant = Variant::kWeakSnr;
  EXPECT_THROW(c.Validate(), DomainError);
  c.snr_db = 5.0;
  EXPECT_NO_THROW(c.Validate());
  c.variant = Variant::kWeak;
  EXPECT_THROW(c.Validate(), DomainError);
  c.snr_db.reset();
  c.target_seconds = 0;
  EXPECT_THROW(c.Validate(), DomainError);
}

TEST(SynthTest, OffsetRange) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const int64_t o = SampleOffset(rng, 48000, 16000);
    ASSERT_GE(o, 0);
    ASSERT_LE(o, 32000);
  }
  EXPECT_EQ(SampleOffset(rng, 16000, 16000), 0);
  EXPECT_THROW(SampleOffset(rng, 1000, 1001), DomainError);
}

TEST(SynthTest, OffsetsAreUniform) {
  Rng rng(2);
  std::vector<int64_t> draws;
  for (int i = 0; i < 100000; ++i) draws.push_back(SampleOffset(rng, 48000, 16000));
  EXPECT_LT(testing::KsDiscreteUniform(draws, 32000), testing::KsCritical001(draws.size()));
}

TEST(SynthTest, SpliceFullLengthIsIdentity) {
  Rng rng(3);
  const AudioClip kw = RandomClip(rng, 16000, 0.5);
  const AudioClip noise = RandomClip(rng, 16000, 0.1);
  EXPECT_EQ(SpliceNoOverlap(kw, noise, 0, 16000).samples, kw.samples);
}

TEST(SynthTest, SpliceIntoSilence) {
  Rng rng(4);
  const AudioClip kw = RandomClip(rng, 100, 0.5);
  const AudioClip out = SpliceNoOverlap(kw, Constant(1000, 0.0f), 250, 1000);
  ASSERT_EQ(out.size(), 1000u);
  for (int i = 0; i < 1000; ++i) {
    const float want = (i >= 250 && i < 350) ? kw.samples[i - 250] : 0.0f;
    ASSERT_EQ(out.samples[i], want) << i;
  }
}

TEST(SynthTest, SpliceKeepsKeywordAndNoiseOutside) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int64_t t = 500 + static_cast<int64_t>(rng.UniformInt(2000));
    const int64_t len = 1 + static_cast<int64_t>(rng.UniformInt(static_cast<uint64_t>(t - 1)));
    const AudioClip kw = RandomClip(rng, len, 0.9);
    const AudioClip noise = RandomClip(rng, 1 + rng.UniformInt(3000), 0.2);
    const auto start = static_cast<int64_t>(rng.UniformInt(noise.size() - 1));
    const int64_t off = SampleOffset(rng, t, len);
    const AudioClip out = SpliceNoOverlap(kw, noise, off, t, start);
    ASSERT_EQ(static_cast<int64_t>(out.size()), t);
    for (int64_t i = 0; i < t; ++i) {
      const float want = (i >= off && i < off + len)
                             ? kw.samples[i - off]
                             : noise.samples[(start + i) % noise.size()];
      ASSERT_EQ(out.samples[i], want);
    }
  }
}

TEST(SynthTest, SpliceRejectsBadArguments) {
  const AudioClip kw = Constant(100, 0.1f);
  EXPECT_THROW(SpliceNoOverlap(kw, Constant(10, 0.1f), 950, 1000), DomainError);
  EXPECT_THROW(SpliceNoOverlap(kw, Constant(10, 0.1f, 8000), 0, 1000), DomainError);
  EXPECT_THROW(SpliceNoOverlap(kw, AudioClip{}, 0, 1000), DomainError);
}

TEST(SynthTest, GainForEqualPowerAtZeroDb) {
  EXPECT_DOUBLE_EQ(SnrNoiseGain(0.04, 0.04, 0.0), 1.0);
  EXPECT_NEAR(SnrNoiseGain(0.04, 0.04, 10.0), std::pow(10.0, -0.5), 1e-15);
  EXPECT_NEAR(SnrNoiseGain(1.0, 0.25, 0.0), 2.0, 1e-15);
  EXPECT_THROW(SnrNoiseGain(0.1, 0.0, 0.0), DegenerateSnrError);
  EXPECT_THROW(SnrNoiseGain(0.0, 0.1, 0.0), DegenerateSnrError);
}

TEST(SynthTest, MixRealizesRequestedSnr) {
  Rng rng(6);
  for (double snr : {-5.0, 0.0, 5.0, 10.0, 20.0}) {
    for (int trial = 0; trial < 20; ++trial) {
      const AudioClip kw = RandomClip(rng, 8000, 0.3);
      const AudioClip noise = RandomClip(rng, 40000, 0.1);
      const int64_t off = SampleOffset(rng, 24000, 8000);
      const auto start = static_cast<int64_t>(rng.UniformInt(16000));
      const MixResult m = MixSnr(kw, noise, off, 24000, snr, start);
      // Recover the scaled noise under the keyword by subtraction.
      double pk = 0, pn = 0;
      for (int64_t i = 0; i < 8000; ++i) {
        const double k = m.peak_scale * kw.samples[i];
        const double n = m.clip.samples[off + i] - k;
        pk += k * k;
        pn += n * n;
      }
      EXPECT_NEAR(10 * std::log10(pk / pn), snr, 0.1);
    }
  }
}

TEST(SynthTest, MixPeakNormalizes) {
  const AudioClip kw = Constant(100, 0.75f);
  const AudioClip noise = Constant(300, 0.5f);
  const MixResult m = MixSnr(kw, noise, 100, 300, 0.0);
  // Gain makes noise 0.75, sum 1.5 -> scaled by 1/1.5.
  EXPECT_NEAR(m.noise_gain, 1.5, 1e-12);
  EXPECT_NEAR(m.peak_scale, 1.0 / 1.5, 1e-12);
  double peak = 0;
  for (float s : m.clip.samples) peak = std::max(peak, double(std::abs(s)));
  EXPECT_NEAR(peak, 1.0, 1e-6);
  EXPECT_THROW(MixSnr(kw, Constant(300, 0.0f), 100, 300, 0.0), DegenerateSnrError);
}

TEST(SynthTest, WhiteNoisePower) {
  const AudioClip n = GenNoise(NoiseKind::kWhite, 2.0, 16000, 11);
  ASSERT_EQ(n.size(), 32000u);
  EXPECT_NEAR(RmsPower(n), 0.01, 0.0005);
  EXPECT_EQ(GenNoise(NoiseKind::kWhite, 2.0, 16000, 11).samples, n.samples);
  EXPECT_NE(GenNoise(NoiseKind::kWhite, 2.0, 16000, 12).samples, n.samples);
}

// Direct DFT power summed over integer-Hz bins in [lo, hi).
double BandPower(const AudioClip& c, int lo, int hi) {
  const std::size_t n = c.size();
  double total = 0;
  for (int k = lo; k < hi; ++k) {
    std::complex<double> acc = 0;
    const double w = -2 * std::numbers::pi * k / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) acc += double(c.samples[i]) * std::polar(1.0, w * i);
    total += std::norm(acc);
  }
  return total;
}

TEST(SynthTest, PinkNoiseHasEqualPowerPerOctave) {
  const AudioClip n = GenNoise(NoiseKind::kPink, 1.0, 16000, 21);
  EXPECT_NEAR(RmsPower(n), 0.01, 0.0005);
  const double low = BandPower(n, 200, 400);
  const double high = BandPower(n, 400, 800);
  EXPECT_NEAR(10 * std::log10(low / high), 0.0, 1.0);
}

class DatasetTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("wkws_synth_" + std::to_string(::getpid()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    MicroCorpusOptions opt;
    opt.clips_per_word = 4;
    WriteMicroCorpus(root_ / "kw", opt);
    fs::create_directories(root_ / "noise");
    SaveWav(GenNoise(NoiseKind::kWhite, 2.5, 16000, 1), root_ / "noise" / "white.wav");
    SaveWav(GenNoise(NoiseKind::kPink, 1.2, 8000, 2), root_ / "noise" / "pink.wav");
  }
  void TearDown() override { fs::remove_all(root_); }

  SynthConfig Config(Variant v, const std::string& out) const {
    SynthConfig c;
    c.variant = v;
    c.target_seconds = 2.0;
    c.seed = 42;
    c.keyword_dir = root_ / "kw";
    c.noise_dir = root_ / "noise";
    c.out_dir = root_ / out;
    if (v == Variant::kWeakSnr) c.snr_db = 5.0;
    return c;
  }

  DatasetManifest Build(const SynthConfig& c) const {
    return BuildDataset(c, ScanKeywordCorpus(c.keyword_dir), ScanNoiseCorpus(c.noise_dir));
  }

  fs::path root_;
};

TEST_F(DatasetTest, ScanCorpusAssignsSplitsAndLabels) {
  const auto entries = ScanKeywordCorpus(root_ / "kw");
  ASSERT_EQ(entries.size(), 48u);
  std::map<Split, int> per_split;
  for (const auto& e : entries) {
    ++per_split[e.split];
    EXPECT_EQ(e.label, MapLabel(e.path.parent_path().filename().string()));
  }
  EXPECT_EQ(per_split[Split::kTrain], 24);
  EXPECT_EQ(per_split[Split::kValidation], 12);
  EXPECT_EQ(per_split[Split::kTest], 12);
  EXPECT_THROW(ScanKeywordCorpus(root_ / "missing"), IoError);
  EXPECT_EQ(ScanNoiseCorpus(root_ / "noise").size(), 2u);
}

TEST_F(DatasetTest, WeakRecordsAreSplicedAndDeterministic) {
  SynthConfig a = Config(Variant::kWeak, "a");
  SynthConfig b = Config(Variant::kWeak, "b");
  b.jobs = 3;
  const DatasetManifest ma = Build(a);
  const DatasetManifest mb = Build(b);
  ASSERT_EQ(ma.records.size(), 48u);
  ASSERT_EQ(mb.records.size(), 48u);
  EXPECT_EQ(ReadBytes(a.out_dir / "train.jsonl").size(), ReadBytes(b.out_dir / "train.jsonl").size());
  for (std::size_t i = 0; i < ma.records.size(); ++i) {
    const auto& r = ma.records[i];
    EXPECT_EQ(ReadBytes(r.out_path), ReadBytes(mb.records[i].out_path));
    EXPECT_EQ(r.seed, mb.records[i].seed);
    EXPECT_EQ(r.offset_samples, mb.records[i].offset_samples);
    const AudioClip out = LoadWav(r.out_path);
    const AudioClip kw = LoadWav(r.source_keyword);
    if (r.split == Split::kTest) {
      EXPECT_FALSE(r.source_noise.has_value());
      EXPECT_EQ(out.samples, kw.samples);
      continue;
    }
    ASSERT_TRUE(r.source_noise.has_value());
    ASSERT_EQ(out.size(), 32000u);
    for (std::size_t j = 0; j < kw.size(); ++j) {
      ASSERT_EQ(out.samples[r.offset_samples + j], kw.samples[j]);
    }
  }
}

TEST_F(DatasetTest, ManifestRoundTripsThroughDisk) {
  const SynthConfig c = Config(Variant::kWeakSnr, "snr");
  const DatasetManifest m = Build(c);
  const DatasetManifest back = ReadManifest(c.out_dir / "manifest.jsonl");
  ASSERT_EQ(back.records.size(), m.records.size());
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    EXPECT_EQ(fs::weakly_canonical(back.records[i].out_path), fs::weakly_canonical(m.records[i].out_path));
    EXPECT_EQ(back.records[i].label, m.records[i].label);
    EXPECT_EQ(back.records[i].snr_db, m.records[i].snr_db);
    EXPECT_EQ(back.records[i].noise_gain, m.records[i].noise_gain);
  }
  EXPECT_EQ(back.config.variant, Variant::kWeakSnr);
  EXPECT_EQ(back.config.snr_db, 5.0);
  EXPECT_EQ(back.config.seed, 42u);
}

TEST_F(DatasetTest, LabelHistogramIsPreserved) {
  const auto entries = ScanKeywordCorpus(root_ / "kw");
  std::map<int, int> want, got;
  for (const auto& e : entries) ++want[e.label];
  for (const auto& r : Build(Config(Variant::kWeak, "h")).records) ++got[r.label];
  EXPECT_EQ(want, got);
}

TEST_F(DatasetTest, WeakPosLeavesUnknownClean) {
  for (const auto& r : Build(Config(Variant::kWeakPos, "pos")).records) {
    if (r.label == kUnknownLabel || r.split == Split::kTest) {
      EXPECT_FALSE(r.source_noise.has_value());
      EXPECT_EQ(LoadWav(r.out_path).size(), 16000u);
    } else {
      EXPECT_TRUE(r.source_noise.has_value());
      EXPECT_EQ(LoadWav(r.out_path).size(), 32000u);
    }
  }
}

TEST_F(DatasetTest, StrictAndLenientHandlingOfBadInput) {
  // A keyword longer than the target clip cannot be placed.
  AudioClip long_clip = Constant(40000, 0.1f);
  SaveWav(long_clip, root_ / "kw" / "yes" / "zz_long.wav");
  EXPECT_THROW(Build(Config(Variant::kWeak, "strict")), Error);
  SynthConfig lenient = Config(Variant::kWeak, "lenient");
  lenient.strict = false;
  EXPECT_EQ(Build(lenient).records.size(), 48u);
}

TEST_F(DatasetTest, NoisyVariantNeedsNoise) {
  SynthConfig c = Config(Variant::kWeak, "x");
  EXPECT_THROW(BuildDataset(c, ScanKeywordCorpus(c.keyword_dir), {}), DomainError);
}

}  // namespace
}  // namespace wkws
