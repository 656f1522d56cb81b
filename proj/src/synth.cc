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

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "fft.h"
#include "wkws/error.h"
#include "wkws/manifest.h"
#include "wkws/parallel.h"

namespace wkws {
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 10> kKeywords = {
    "yes", "no", "up", "down", "left", "right", "on", "off", "stop", "go"};

constexpr double kNoiseRms = 0.1;

void ScaleToRms(std::vector<double>& x, double target_rms) {
  double power = 0.0;
  for (double v : x) power += v * v;
  power /= static_cast<double>(x.size());
  const double scale = power > 0.0 ? target_rms / std::sqrt(power) : 0.0;
  for (double& v : x) v *= scale;
}

std::set<std::string> ReadList(const fs::path& path) {
  std::set<std::string> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (!line.empty()) out.insert(line);
  }
  return out;
}

void CheckSpliceArgs(const AudioClip& keyword, const AudioClip& noise,
                     int64_t offset, int64_t t_samples) {
  if (keyword.sample_rate != noise.sample_rate) {
    throw DomainError("keyword and noise sample rates differ (" +
                      std::to_string(keyword.sample_rate) + " vs " +
                      std::to_string(noise.sample_rate) + ")");
  }
  if (keyword.empty()) throw DomainError("empty keyword clip");
  if (noise.empty()) throw DomainError("empty noise clip");
  if (offset < 0 ||
      offset + static_cast<int64_t>(keyword.size()) > t_samples) {
    throw DomainError("keyword at offset " + std::to_string(offset) +
                      " does not fit in " + std::to_string(t_samples) +
                      " samples");
  }
}

// Reads noise cyclically from noise_start.
std::vector<float> NoiseWindow(const AudioClip& noise, int64_t t_samples,
                               int64_t noise_start) {
  std::vector<float> out(static_cast<std::size_t>(t_samples));
  const auto n = static_cast<int64_t>(noise.size());
  int64_t src = noise_start % n;
  for (int64_t i = 0; i < t_samples; ++i) {
    out[i] = noise.samples[src];
    if (++src == n) src = 0;
  }
  return out;
}

fs::path AudioPathFor(const fs::path& out_dir, std::size_t index,
                      Split split, const KeywordEntry& entry) {
  std::ostringstream name;
  name << entry.path.parent_path().filename().string() << "_"
       << entry.path.stem().string() << "_" << index << ".wav";
  return out_dir / "audio" / std::string(ToString(split)) / name.str();
}

}  // namespace

std::string_view ToString(Variant v) {
  switch (v) {
    case Variant::kClean: return "clean";
    case Variant::kWeak: return "weak";
    case Variant::kWeakSnr: return "weak_snr";
    case Variant::kWeakPos: return "weak_pos";
  }
  return "?";
}

std::string_view ToString(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

std::string_view ToString(NoiseKind k) {
  return k == NoiseKind::kWhite ? "white" : "pink";
}

Variant ParseVariant(std::string_view s) {
  if (s == "clean") return Variant::kClean;
  if (s == "weak") return Variant::kWeak;
  if (s == "weak_snr") return Variant::kWeakSnr;
  if (s == "weak_pos") return Variant::kWeakPos;
  throw DomainError("unknown variant '" + std::string(s) + "'");
}

Split ParseSplit(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw DomainError("unknown split '" + std::string(s) + "'");
}

NoiseKind ParseNoiseKind(std::string_view s) {
  if (s == "white") return NoiseKind::kWhite;
  if (s == "pink") return NoiseKind::kPink;
  throw DomainError("unknown noise kind '" + std::string(s) + "'");
}

void SynthConfig::Validate() const {
  if (!(target_seconds > 0.0)) throw DomainError("duration must be positive");
  if (sample_rate <= 0) throw DomainError("sample rate must be positive");
  const bool wants_snr = variant == Variant::kWeakSnr;
  if (wants_snr && !snr_db) throw DomainError("weak_snr requires --snr");
  if (!wants_snr && snr_db) {
    throw DomainError("--snr is only valid with the weak_snr variant");
  }
  if (snr_db && !std::isfinite(*snr_db)) throw DomainError("snr must be finite");
}

int64_t SynthConfig::target_samples() const {
  return std::llround(target_seconds * sample_rate);
}

int MapLabel(std::string_view keyword_name) {
  if (keyword_name.empty()) throw DomainError("empty keyword name");
  for (std::size_t i = 0; i < kKeywords.size(); ++i) {
    if (kKeywords[i] == keyword_name) return static_cast<int>(i);
  }
  return kUnknownLabel;
}

int64_t SampleOffset(Rng& rng, int64_t t_samples, int64_t keyword_samples) {
  if (keyword_samples < 0 || keyword_samples > t_samples) {
    throw DomainError("keyword length " + std::to_string(keyword_samples) +
                      " exceeds target length " + std::to_string(t_samples));
  }
  return static_cast<int64_t>(
      rng.UniformInt(static_cast<uint64_t>(t_samples - keyword_samples)));
}

AudioClip SpliceNoOverlap(const AudioClip& keyword, const AudioClip& noise,
                          int64_t offset, int64_t t_samples,
                          int64_t noise_start) {
  CheckSpliceArgs(keyword, noise, offset, t_samples);
  AudioClip out;
  out.sample_rate = keyword.sample_rate;
  out.samples = NoiseWindow(noise, t_samples, noise_start);
  std::copy(keyword.samples.begin(), keyword.samples.end(),
            out.samples.begin() + offset);
  return out;
}

double SnrNoiseGain(double keyword_power, double noise_power, double snr_db) {
  if (!(noise_power > 0.0)) {
    throw DegenerateSnrError("noise is silent under the keyword");
  }
  if (!(keyword_power > 0.0)) {
    throw DegenerateSnrError("keyword is silent");
  }
  return std::sqrt(keyword_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
}

MixResult MixSnr(const AudioClip& keyword, const AudioClip& noise,
                 int64_t offset, int64_t t_samples, double snr_db,
                 int64_t noise_start) {
  CheckSpliceArgs(keyword, noise, offset, t_samples);
  const std::vector<float> window = NoiseWindow(noise, t_samples, noise_start);
  const auto len = static_cast<int64_t>(keyword.size());
  const double gain =
      SnrNoiseGain(RmsPower(keyword),
                   RmsPower(window, offset, offset + len), snr_db);

  std::vector<double> mix(window.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    mix[i] = gain * window[i];
  }
  for (int64_t i = 0; i < len; ++i) mix[offset + i] += keyword.samples[i];
  for (double v : mix) peak = std::max(peak, std::abs(v));

  MixResult result;
  result.noise_gain = gain;
  result.peak_scale = peak > 1.0 ? 1.0 / peak : 1.0;
  result.clip.sample_rate = keyword.sample_rate;
  result.clip.samples.resize(mix.size());
  for (std::size_t i = 0; i < mix.size(); ++i) {
    result.clip.samples[i] = static_cast<float>(mix[i] * result.peak_scale);
  }
  return result;
}

AudioClip GenNoise(NoiseKind kind, double seconds, int sample_rate,
                   uint64_t seed) {
  if (!(seconds > 0.0)) throw DomainError("noise duration must be positive");
  if (sample_rate <= 0) throw DomainError("sample rate must be positive");
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  if (n == 0) throw DomainError("noise duration rounds to zero samples");

  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.Normal();

  if (kind == NoiseKind::kPink && n > 1) {
    // Power ~ 1/f: scale amplitude by 1/sqrt(k), drop DC.
    internal::RealFft fft(static_cast<int>(n));
    std::vector<std::complex<double>> spec(fft.bins());
    fft.Forward(x, spec);
    spec[0] = 0.0;
    for (std::size_t k = 1; k < spec.size(); ++k) {
      spec[k] /= std::sqrt(static_cast<double>(k));
    }
    fft.Inverse(spec, x);
  }
  ScaleToRms(x, kNoiseRms);

  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    clip.samples[i] = static_cast<float>(std::clamp(x[i], -1.0, 1.0));
  }
  return clip;
}

std::vector<KeywordEntry> ScanKeywordCorpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw IoError("keyword corpus is not a directory: " + dir.string());
  }
  const std::set<std::string> validation = ReadList(dir / "validation_list.txt");
  const std::set<std::string> testing = ReadList(dir / "testing_list.txt");

  std::vector<std::string> rel_paths;
  for (const auto& word_dir : fs::directory_iterator(dir)) {
    if (!word_dir.is_directory()) continue;
    const std::string word = word_dir.path().filename().string();
    if (word.empty() || word[0] == '_' || word[0] == '.') continue;
    for (const auto& f : fs::directory_iterator(word_dir.path())) {
      if (f.is_regular_file() && f.path().extension() == ".wav") {
        rel_paths.push_back(word + "/" + f.path().filename().string());
      }
    }
  }
  std::sort(rel_paths.begin(), rel_paths.end());

  std::vector<KeywordEntry> entries;
  entries.reserve(rel_paths.size());
  for (const auto& rel : rel_paths) {
    KeywordEntry e;
    e.path = dir / rel;
    e.label = MapLabel(rel.substr(0, rel.find('/')));
    if (testing.count(rel)) {
      e.split = Split::kTest;
    } else if (validation.count(rel)) {
      e.split = Split::kValidation;
    } else {
      e.split = Split::kTrain;
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<fs::path> ScanNoiseCorpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw IoError("noise corpus is not a directory: " + dir.string());
  }
  std::vector<fs::path> out;
  for (const auto& f : fs::recursive_directory_iterator(dir)) {
    if (f.is_regular_file() && f.path().extension() == ".wav") {
      out.push_back(f.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

DatasetManifest BuildDataset(const SynthConfig& config,
                             const std::vector<KeywordEntry>& keywords,
                             const std::vector<fs::path>& noise_paths) {
  config.Validate();
  if (keywords.empty()) throw DomainError("keyword corpus is empty");
  const bool needs_noise = config.variant != Variant::kClean;
  if (needs_noise && noise_paths.empty()) {
    throw DomainError("variant " + std::string(ToString(config.variant)) +
                      " needs a non-empty noise corpus");
  }

  std::vector<AudioClip> noises(needs_noise ? noise_paths.size() : 0);
  ParallelFor(noises.size(), config.jobs, [&](std::size_t i) {
    noises[i] = Resample(LoadWav(noise_paths[i]), config.sample_rate);
    if (noises[i].empty()) {
      throw DomainError("empty noise file " + noise_paths[i].string());
    }
  });

  for (const char* split : {"train", "validation", "test"}) {
    fs::create_directories(config.out_dir / "audio" / split);
  }

  const int64_t t_samples = config.target_samples();
  std::vector<std::optional<SampleRecord>> slots(keywords.size());
  std::vector<std::string> failures(keywords.size());

  ParallelFor(keywords.size(), config.jobs, [&](std::size_t index) {
    const KeywordEntry& entry = keywords[index];
    try {
      SampleRecord rec;
      rec.label = entry.label;
      rec.split = entry.split;
      rec.source_keyword = entry.path;
      rec.seed = DeriveSeed(config.seed, index);
      rec.out_path = AudioPathFor(config.out_dir, index, entry.split, entry);
      if (entry.label < 0 || entry.label >= kNumClasses) {
        throw DomainError("label out of range");
      }

      const AudioClip keyword =
          Resample(LoadWav(entry.path), config.sample_rate);
      const bool passthrough =
          config.variant == Variant::kClean || entry.split == Split::kTest ||
          (config.variant == Variant::kWeakPos &&
           entry.label == kUnknownLabel);

      AudioClip out;
      if (passthrough) {
        out = keyword;
      } else {
        Rng rng(rec.seed);
        const std::size_t which = rng.UniformInt(noises.size() - 1);
        const AudioClip& noise = noises[which];
        const auto noise_len = static_cast<int64_t>(noise.size());
        const int64_t noise_start =
            noise_len > t_samples
                ? static_cast<int64_t>(rng.UniformInt(
                      static_cast<uint64_t>(noise_len - t_samples)))
                : 0;
        rec.offset_samples = SampleOffset(
            rng, t_samples, static_cast<int64_t>(keyword.size()));
        rec.source_noise = noise_paths[which];
        rec.noise_start_samples = noise_start;
        if (config.variant == Variant::kWeakSnr) {
          MixResult mixed = MixSnr(keyword, noise, rec.offset_samples,
                                   t_samples, *config.snr_db, noise_start);
          rec.snr_db = config.snr_db;
          rec.noise_gain = mixed.noise_gain;
          out = std::move(mixed.clip);
        } else {
          out = SpliceNoOverlap(keyword, noise, rec.offset_samples, t_samples,
                                noise_start);
        }
      }
      SaveWav(out, rec.out_path);
      slots[index] = std::move(rec);
    } catch (const std::exception& e) {
      const std::string msg = "record " + std::to_string(index) + " (" +
                              entry.path.string() + "): " + e.what();
      if (config.strict) {
        throw Error(msg);
      }
      failures[index] = msg;
    }
  });

  DatasetManifest manifest;
  manifest.config = config;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      manifest.records.push_back(std::move(*slots[i]));
    } else if (!failures[i].empty()) {
      std::cerr << "skipped " << failures[i] << "\n";
    }
  }

  WriteManifest(manifest, config.out_dir / "manifest.jsonl");
  for (Split split : {Split::kTrain, Split::kValidation, Split::kTest}) {
    DatasetManifest part;
    part.config = config;
    for (const auto& r : manifest.records) {
      if (r.split == split) part.records.push_back(r);
    }
    WriteManifest(part, config.out_dir / (std::string(ToString(split)) + ".jsonl"));
  }
  return manifest;
}

}  // namespace wkws
